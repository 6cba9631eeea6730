#include "convexity/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "convexity/errors.hpp"

namespace cvx::jsonw {

namespace {

void emit(const Json& v, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
    const char* nl = indent > 0 ? "\n" : "";

    switch (v.type()) {
        case nlohmann::detail::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            out += nl;
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) {
                    out += ',';
                    out += nl;
                }
                first = false;
                out += pad;
                out += Json(it.key()).dump();  // quoted + escaped
                out += indent > 0 ? ": " : ":";
                emit(it.value(), out, indent, depth + 1);
            }
            out += nl;
            out += close_pad;
            out += '}';
            return;
        }
        case nlohmann::detail::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            out += nl;
            bool first = true;
            for (const auto& item : v) {
                if (!first) {
                    out += ',';
                    out += nl;
                }
                first = false;
                out += pad;
                emit(item, out, indent, depth + 1);
            }
            out += nl;
            out += close_pad;
            out += ']';
            return;
        }
        case nlohmann::detail::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) {
                out += "null";
                return;
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            out += buf;
            return;
        }
        default:
            out += v.dump();  // strings, ints, bools, null
            return;
    }
}

}  // namespace

std::string dump(const Json& value, int indent) {
    std::string out;
    emit(value, out, indent, 0);
    if (indent > 0) out += '\n';
    return out;
}

void write_file(const Json& value, const std::string& path, int indent) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    out << dump(value, indent);
}

}  // namespace cvx::jsonw
