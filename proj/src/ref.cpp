#include "convexity/ref.hpp"

#include <vector>

#include "convexity/errors.hpp"

// Everything here is written with index loops and a single flat accumulator
// per quantity; no Eigen products, no blocking. Deliberately boring.

namespace cvx::ref {

namespace {

using Vec = std::vector<double>;

struct Trace {
    std::vector<Vec> x;  // activations per level
    std::vector<Vec> m;  // masks per level (1.0 active / 0.0 off)
};

void fwd(const Architecture& arch, const Weights& w, const Dataset& data, int s, Trace& tr) {
    const int L = arch.matrix_count();
    tr.x.assign(L + 1, Vec());
    tr.m.assign(L, Vec());
    tr.x[0].resize(arch.width(0));
    for (int k = 0; k < arch.width(0); ++k) tr.x[0][k] = data.input(s)(k);
    for (int i = 0; i < L; ++i) {
        const int rows = arch.width(i), cols = arch.width(i + 1);
        tr.x[i + 1].assign(cols, 0.0);
        tr.m[i].assign(cols, 0.0);
        for (int c = 0; c < cols; ++c) {
            double z = 0.0;
            for (int r = 0; r < rows; ++r) z += w.mat(i)(r, c) * tr.x[i][r];
            if (z > 0.0) {
                tr.m[i][c] = 1.0;
                tr.x[i + 1][c] = z;
            }
        }
    }
}

}  // namespace

double loss_value(const Architecture& arch, const Weights& w, const Dataset& data) {
    check_shape(arch, w);
    Trace tr;
    double acc = 0.0;
    for (int s = 0; s < data.size(); ++s) {
        fwd(arch, w, data, s, tr);
        const double e = tr.x.back()[0] - data.label(s);
        acc += e * e;
    }
    return acc / (2.0 * data.size());
}

Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda) {
    check_shape(arch, w);
    Weights g = Weights::zeros(arch);
    const int L = arch.matrix_count();
    const double inv_n = 1.0 / data.size();
    Trace tr;
    for (int s = 0; s < data.size(); ++s) {
        fwd(arch, w, data, s, tr);
        Vec c{(tr.x.back()[0] - data.label(s)) * inv_n};
        for (int i = L - 1; i >= 0; --i) {
            const int rows = arch.width(i), cols = arch.width(i + 1);
            Vec d(cols);
            for (int k = 0; k < cols; ++k) d[k] = tr.m[i][k] * c[k];
            for (int cc = 0; cc < cols; ++cc)
                for (int r = 0; r < rows; ++r) g.mat(i)(r, cc) += tr.x[i][r] * d[cc];
            if (i > 0) {
                Vec cn(rows, 0.0);
                for (int r = 0; r < rows; ++r)
                    for (int k = 0; k < cols; ++k) cn[r] += w.mat(i)(r, k) * d[k];
                c = cn;
            }
        }
    }
    for (int i = 0; i < L; ++i)
        for (int cc = 0; cc < arch.width(i + 1); ++cc)
            for (int r = 0; r < arch.width(i); ++r) g.mat(i)(r, cc) += lambda * w.mat(i)(r, cc);
    return g;
}

Weights hvp(const Architecture& arch, const Weights& w, const Dataset& data, double lambda,
            const Direction& dir) {
    check_shape(arch, w);
    check_shape(arch, dir);
    Weights h = Weights::zeros(arch);
    const int L = arch.matrix_count();
    const double inv_n = 1.0 / data.size();
    Trace tr;
    for (int s = 0; s < data.size(); ++s) {
        fwd(arch, w, data, s, tr);
        std::vector<Vec> xd(L + 1);
        xd[0].assign(arch.width(0), 0.0);
        for (int i = 0; i < L; ++i) {
            const int rows = arch.width(i), cols = arch.width(i + 1);
            xd[i + 1].assign(cols, 0.0);
            for (int c = 0; c < cols; ++c) {
                double zd = 0.0;
                for (int r = 0; r < rows; ++r)
                    zd += w.mat(i)(r, c) * xd[i][r] + dir.mat(i)(r, c) * tr.x[i][r];
                xd[i + 1][c] = tr.m[i][c] * zd;
            }
        }
        Vec c{(tr.x.back()[0] - data.label(s)) * inv_n};
        Vec cd{xd[L][0] * inv_n};
        for (int i = L - 1; i >= 0; --i) {
            const int rows = arch.width(i), cols = arch.width(i + 1);
            Vec d(cols), dd(cols);
            for (int k = 0; k < cols; ++k) {
                d[k] = tr.m[i][k] * c[k];
                dd[k] = tr.m[i][k] * cd[k];
            }
            for (int cc = 0; cc < cols; ++cc)
                for (int r = 0; r < rows; ++r)
                    h.mat(i)(r, cc) += xd[i][r] * d[cc] + tr.x[i][r] * dd[cc];
            if (i > 0) {
                Vec cn(rows, 0.0), cdn(rows, 0.0);
                for (int r = 0; r < rows; ++r)
                    for (int k = 0; k < cols; ++k) {
                        cn[r] += w.mat(i)(r, k) * d[k];
                        cdn[r] += dir.mat(i)(r, k) * d[k] + w.mat(i)(r, k) * dd[k];
                    }
                c = cn;
                cd = cdn;
            }
        }
    }
    for (int i = 0; i < L; ++i)
        for (int cc = 0; cc < arch.width(i + 1); ++cc)
            for (int r = 0; r < arch.width(i); ++r)
                h.mat(i)(r, cc) += lambda * dir.mat(i)(r, cc);
    return h;
}

double laplacian(const Architecture& arch, const Weights& w, const Dataset& data) {
    check_shape(arch, w);
    const int L = arch.matrix_count();
    double acc = 0.0;
    Trace tr;
    for (int s = 0; s < data.size(); ++s) {
        fwd(arch, w, data, s, tr);
        Vec c{1.0};
        for (int i = L - 1; i >= 0; --i) {
            const int rows = arch.width(i), cols = arch.width(i + 1);
            Vec d(cols);
            double dsq = 0.0, xsq = 0.0;
            for (int k = 0; k < cols; ++k) {
                d[k] = tr.m[i][k] * c[k];
                dsq += d[k] * d[k];
            }
            for (int r = 0; r < rows; ++r) xsq += tr.x[i][r] * tr.x[i][r];
            acc += xsq * dsq;
            if (i > 0) {
                Vec cn(rows, 0.0);
                for (int r = 0; r < rows; ++r)
                    for (int k = 0; k < cols; ++k) cn[r] += w.mat(i)(r, k) * d[k];
                c = cn;
            }
        }
    }
    return acc / data.size();
}

double directional_second(const Architecture& arch, const Weights& w, const Dataset& data,
                          double lambda, const Direction& dir) {
    check_shape(arch, w);
    check_shape(arch, dir);
    const int L = arch.matrix_count();
    double acc = 0.0;
    Trace tr;

    // Applies matrix^T then the level mask, with loops.
    auto push = [&](const Vec& v, const Eigen::MatrixXd& mat, const Vec& mask) {
        Vec out(mask.size(), 0.0);
        for (std::size_t c = 0; c < out.size(); ++c) {
            double z = 0.0;
            for (std::size_t r = 0; r < v.size(); ++r) z += mat(r, c) * v[r];
            out[c] = mask[c] * z;
        }
        return out;
    };

    for (int s = 0; s < data.size(); ++s) {
        fwd(arch, w, data, s, tr);
        const double e = tr.x.back()[0] - data.label(s);

        double dy = 0.0;
        for (int ins = 0; ins < L; ++ins) {
            Vec v = push(tr.x[ins], dir.mat(ins), tr.m[ins]);
            for (int j = ins + 1; j < L; ++j) v = push(v, w.mat(j), tr.m[j]);
            dy += v[0];
        }

        double d2y = 0.0;
        for (int j = 0; j + 1 < L; ++j) {
            Vec t = push(tr.x[j], dir.mat(j), tr.m[j]);
            for (int i = j + 1; i < L; ++i) {
                Vec sd = push(t, dir.mat(i), tr.m[i]);
                for (int k = i + 1; k < L; ++k) sd = push(sd, w.mat(k), tr.m[k]);
                d2y += sd[0];
                if (i + 1 < L) t = push(t, w.mat(i), tr.m[i]);
            }
        }
        acc += dy * dy + 2.0 * e * d2y;
    }

    double xsq = 0.0;
    for (int i = 0; i < L; ++i)
        for (int cc = 0; cc < arch.width(i + 1); ++cc)
            for (int r = 0; r < arch.width(i); ++r) xsq += dir.mat(i)(r, cc) * dir.mat(i)(r, cc);
    return acc / data.size() + lambda * xsq;
}

}  // namespace cvx::ref
