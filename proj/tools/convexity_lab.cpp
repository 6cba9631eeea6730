// convexity-lab: certification and trajectory diagnostics for the regularized
// loss surface of feed-forward ReLU networks.

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "convexity/data_io.hpp"
#include "convexity/errors.hpp"
#include "convexity/json_writer.hpp"
#include "convexity/linear.hpp"
#include "convexity/loss.hpp"
#include "convexity/net.hpp"
#include "convexity/plot.hpp"
#include "convexity/region.hpp"
#include "convexity/rng.hpp"
#include "convexity/trajectory.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using cvx::jsonw::Json;

// ---------------------------------------------------------------- helpers

std::vector<int> parse_widths(const std::string& text, char sep) {
    std::vector<int> widths;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep)) {
        try {
            widths.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw cvx::InvalidInput("bad width '" + part + "' in '" + text + "'");
        }
    }
    if (widths.empty()) throw cvx::InvalidInput("empty architecture spec");
    return widths;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(part);
    return out;
}

struct LoadedData {
    cvx::Dataset data;
    std::optional<cvx::Weights> teacher;
    std::optional<cvx::Architecture> teacher_arch;
};

// --data forms:
//   csv:path
//   idx:images,labels[,limit[,digit]]
//   teacher:widths=2-4-1,scale=1,noise=0,n=64,seed=7,radius=1
LoadedData load_data(const std::string& spec, bool header, std::uint64_t default_seed) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw cvx::InvalidInput("data spec needs a 'kind:' prefix: " + spec);
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);

    if (kind == "csv") return {cvx::io::load_csv(rest, header), std::nullopt, std::nullopt};

    if (kind == "idx") {
        const auto parts = split(rest, ',');
        if (parts.size() < 2 || parts.size() > 4)
            throw cvx::InvalidInput("idx spec is idx:images,labels[,limit[,digit]]");
        const int limit = parts.size() > 2 ? std::stoi(parts[2]) : 0;
        const int digit = parts.size() > 3 ? std::stoi(parts[3]) : 0;
        return {cvx::io::load_idx(parts[0], parts[1], limit, digit), std::nullopt, std::nullopt};
    }

    if (kind == "teacher") {
        std::vector<int> widths;
        double scale = 1.0, noise = 0.0, radius = 1.0;
        int n = 64;
        std::uint64_t seed = default_seed;
        for (const std::string& kv : split(rest, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw cvx::InvalidInput("teacher spec entries are key=value: " + kv);
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "widths")
                widths = parse_widths(val, '-');
            else if (key == "scale")
                scale = std::stod(val);
            else if (key == "noise")
                noise = std::stod(val);
            else if (key == "n")
                n = std::stoi(val);
            else if (key == "seed")
                seed = std::stoull(val);
            else if (key == "radius")
                radius = std::stod(val);
            else
                throw cvx::InvalidInput("unknown teacher key '" + key + "'");
        }
        if (widths.empty()) throw cvx::InvalidInput("teacher spec needs widths=");
        cvx::Architecture tarch(widths);
        cvx::io::TeacherSpec tspec{tarch, scale, noise, n, seed, radius};
        auto gen = cvx::io::gen_teacher(tspec);
        return {std::move(gen.data), std::move(gen.teacher_weights), std::move(tarch)};
    }
    throw cvx::InvalidInput("unknown data kind '" + kind + "'");
}

cvx::Weights load_weights_file(const cvx::Architecture& arch, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cvx::InvalidInput("cannot open weights file '" + path + "'");
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    Eigen::VectorXd flat(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) flat(static_cast<int>(i)) = vals[i];
    return cvx::Weights::from_flat(arch, flat);
}

void save_weights_file(const cvx::Weights& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw cvx::InvalidInput("cannot open '" + path + "' for writing");
    const Eigen::VectorXd flat = w.to_flat();
    char buf[64];
    for (int i = 0; i < flat.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", flat(i));
        out << buf << '\n';
    }
}

// --weights forms: zero | random[:scale] | teacher | file:path
cvx::Weights make_weights(const std::string& spec, const cvx::Architecture& arch,
                          std::uint64_t seed, const LoadedData& loaded) {
    if (spec == "zero") return cvx::Weights::zeros(arch);
    if (spec == "teacher") {
        if (!loaded.teacher) throw cvx::InvalidInput("--weights teacher needs teacher data");
        if (!(arch == *loaded.teacher_arch))
            throw cvx::InvalidInput("--weights teacher needs --arch equal to the teacher widths");
        return *loaded.teacher;
    }
    if (spec.rfind("random", 0) == 0) {
        double scale = 1.0;
        if (spec.size() > 6) {
            if (spec[6] != ':') throw cvx::InvalidInput("weights spec is random[:scale]");
            scale = std::stod(spec.substr(7));
        }
        return cvx::Weights::gaussian(arch, cvx::rng::splitmix(seed ^ 0x57a7e5ULL), scale);
    }
    if (spec.rfind("file:", 0) == 0) return load_weights_file(arch, spec.substr(5));
    throw cvx::InvalidInput("unknown weights spec '" + spec + "'");
}

void write_trajectory_csv(const cvx::traj::TrajectoryRecord& rec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cvx::InvalidInput("cannot open '" + path + "' for writing");
    out << "t,loss,grad_sq,gamma_dd,normalized,boundary_hit\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (const auto& s : rec.samples) {
        put(s.t);
        out << ',';
        put(s.loss);
        out << ',';
        put(s.grad_sq);
        out << ',';
        put(s.gamma_dd);
        out << ',';
        if (s.normalized) put(*s.normalized);
        out << ',' << (s.boundary_hit ? 1 : 0) << '\n';
    }
}

cvx::traj::TrajectoryRecord read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cvx::InvalidInput("cannot open trajectory CSV '" + path + "'");
    cvx::traj::TrajectoryRecord rec;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;  // header
        const auto fields = split(line, ',');
        if (fields.size() != 6) throw cvx::ParseError("expected 6 fields", line_no);
        cvx::traj::Sample s;
        try {
            s.t = std::stod(fields[0]);
            s.loss = std::stod(fields[1]);
            s.grad_sq = std::stod(fields[2]);
            s.gamma_dd = std::stod(fields[3]);
            if (!fields[4].empty()) s.normalized = std::stod(fields[4]);
            s.boundary_hit = fields[5] == "1";
        } catch (const std::exception&) {
            throw cvx::ParseError("non-numeric field", line_no);
        }
        rec.samples.push_back(s);
    }
    if (rec.samples.empty()) throw cvx::ParseError("no trajectory rows", line_no);
    if (rec.samples.size() > 1) rec.step = rec.samples[1].t - rec.samples[0].t;
    rec.t1 = rec.samples.back().t;
    rec.t0 = cvx::traj::detect_t0(rec);
    return rec;
}

Json sample_json(const cvx::traj::Sample& s) {
    Json j;
    j["t"] = s.t;
    j["loss"] = s.loss;
    j["grad_sq"] = s.grad_sq;
    j["gamma_dd"] = s.gamma_dd;
    if (s.normalized)
        j["normalized"] = *s.normalized;
    else
        j["normalized"] = nullptr;
    j["boundary_hit"] = s.boundary_hit;
    return j;
}

Json trajectory_summary(const cvx::traj::TrajectoryRecord& rec) {
    Json j;
    j["samples"] = rec.samples.size();
    j["t1"] = rec.t1;
    if (rec.t0)
        j["t0"] = *rec.t0;
    else
        j["t0"] = nullptr;
    if (rec.C)
        j["decay_constant"] = *rec.C;
    else
        j["decay_constant"] = nullptr;
    const auto frac = cvx::traj::loss_change_fraction(rec);
    if (frac)
        j["loss_change_fraction"] = *frac;
    else
        j["loss_change_fraction"] = nullptr;
    j["first"] = sample_json(rec.samples.front());
    j["last"] = sample_json(rec.samples.back());
    return j;
}

void emit_report(const Json& report, const std::string& out_path, double wall_seconds, int jobs) {
    Json doc;
    Json envelope;
    envelope["tool"] = "convexity-lab";
    envelope["version"] = kVersion;
    envelope["wall_clock_seconds"] = wall_seconds;
    envelope["generated_at_unix"] = static_cast<long long>(std::time(nullptr));
    envelope["jobs"] = jobs;
    doc["envelope"] = envelope;
    doc["report"] = report;
    if (out_path.empty())
        std::cout << cvx::jsonw::dump(doc);
    else
        cvx::jsonw::write_file(doc, out_path);
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int resolve_jobs(int jobs_flag) {
    if (jobs_flag > 0) {
        omp_set_num_threads(jobs_flag);
        return jobs_flag;
    }
    return omp_get_max_threads();
}

// ------------------------------------------------------------- subcommands

struct CertifyArgs {
    std::string arch, data, weights = "random", out;
    bool header = false;
    double lambda = 0.0, theta = 0.0, radius = 0.0;
    std::uint64_t seed = 1;
    int audit_trials = 1000;
    int probe_samples = 200;
    double probe_radius = 1e-2;
    double probe_grad_tol = 1e-6;
    int hessian_cap = 4096;
    int jobs = 0;
};

int run_certify(const CertifyArgs& a) {
    Timer timer;
    const int jobs = resolve_jobs(a.jobs);
    cvx::Architecture arch(parse_widths(a.arch, ','));
    LoadedData loaded = load_data(a.data, a.header, a.seed);
    if (a.radius > 0.0)
        loaded.data = cvx::Dataset::with_declared_radius(loaded.data.inputs(),
                                                         loaded.data.labels(), a.radius);
    const cvx::Weights w = make_weights(a.weights, arch, a.seed, loaded);
    const cvx::region::RegionSpec spec(a.lambda, a.theta, loaded.data.radius(),
                                       arch.hidden_depth());

    Json report;
    report["schema_version"] = 1;
    report["command"] = "certify";
    Json cfg;
    cfg["arch"] = a.arch;
    cfg["data"] = a.data;
    cfg["weights"] = a.weights;
    cfg["lambda"] = a.lambda;
    cfg["theta"] = a.theta;
    cfg["radius"] = loaded.data.radius();
    cfg["seed"] = a.seed;
    cfg["samples"] = loaded.data.size();
    cfg["audit_trials"] = a.audit_trials;
    report["config"] = cfg;

    const auto cert = cvx::region::certify(arch, w, loaded.data, spec, a.hessian_cap);
    Json jc;
    jc["in_region"] = cert.in_region;
    jc["margin"] = cert.margin;
    jc["lhs"] = cert.lhs;
    jc["threshold"] = cvx::region::threshold(spec);
    jc["min_eig"] = cert.min_eig;
    jc["eig_residual"] = cert.eig_residual;
    jc["certified"] = cert.certified;
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(cert.signature.hash()));
    Json jsig;
    jsig["hash"] = hash_hex;
    jsig["any_boundary"] = cert.signature.any_boundary();
    Json fractions = Json::array();
    for (int layer = 1; layer <= cert.signature.layers(); ++layer)
        fractions.push_back(cert.signature.active_fraction(layer));
    jsig["active_fraction"] = fractions;
    jc["signature"] = jsig;
    report["certificate"] = jc;

    const auto rc =
        cvx::net::region_classify(arch, w, loaded.data, cvx::region::default_boundary_eps(w));
    Json jr;
    jr["kind"] = rc.kind == cvx::RegionClass::Kind::SmoothAnalytic     ? "smooth-analytic"
                 : rc.kind == cvx::RegionClass::Kind::SmoothConstant   ? "smooth-constant"
                                                                       : "potentially-nonsmooth";
    if (rc.kind != cvx::RegionClass::Kind::SmoothAnalytic) {
        Json jw;
        jw["sample"] = rc.witness.sample;
        jw["layer"] = rc.witness.layer;
        jw["unit"] = rc.witness.unit;
        jr["witness"] = jw;
    }
    report["region_class"] = jr;

    report["capture_bound"] =
        cvx::region::global_min_capture(a.lambda, arch.hidden_depth(), loaded.data.radius());

    bool pass = true;
    if (a.audit_trials > 0) {
        const auto audit =
            cvx::region::audit_floor(arch, w, loaded.data, a.audit_trials, a.seed);
        Json ja;
        ja["trials"] = audit.trials;
        ja["violations"] = audit.violations;
        ja["floor"] = audit.floor;
        ja["min_second"] = audit.min_second;
        ja["worst_slack"] = audit.worst_slack;
        report["floor_audit"] = ja;
        if (audit.violations > 0) pass = false;
    }

    const double grad_norm = cvx::loss::gradient(arch, w, loaded.data, a.lambda).norm();
    report["grad_norm"] = grad_norm;
    if (grad_norm <= a.probe_grad_tol && a.probe_samples > 0) {
        const auto probe =
            cvx::region::isolation_probe(arch, w, loaded.data, spec, a.probe_samples,
                                         a.probe_radius, a.seed, a.probe_grad_tol);
        Json jp;
        jp["samples"] = probe.samples;
        jp["radius"] = probe.radius;
        jp["min_increase"] = probe.min_increase;
        jp["mean_increase"] = probe.mean_increase;
        const double quad_floor =
            0.5 * a.theta * probe.radius * probe.radius * (1.0 - 1e-3);
        jp["quadratic_floor"] = quad_floor;
        const bool growth = probe.min_increase >= quad_floor;
        jp["quadratic_growth"] = growth;
        report["isolation_probe"] = jp;
        if (cert.certified && !growth) pass = false;
    } else {
        report["isolation_probe"] = nullptr;
    }

    report["pass"] = pass;
    emit_report(report, a.out, timer.seconds(), jobs);
    return pass ? 0 : 2;
}

struct FlowArgs {
    std::string arch, data, weights = "random", out, csv, save_weights;
    bool header = false;
    bool gronwall = false;
    double lambda = 0.0, radius = 0.0;
    double step = 0.0, horizon = 1.0;
    int log_every = 1;
    std::uint64_t seed = 1;
    int jobs = 0;
};

int run_flow(const FlowArgs& a) {
    Timer timer;
    const int jobs = resolve_jobs(a.jobs);
    cvx::Architecture arch(parse_widths(a.arch, ','));
    LoadedData loaded = load_data(a.data, a.header, a.seed);
    if (a.radius > 0.0)
        loaded.data = cvx::Dataset::with_declared_radius(loaded.data.inputs(),
                                                         loaded.data.labels(), a.radius);
    const cvx::Weights w0 = make_weights(a.weights, arch, a.seed, loaded);
    if (!(a.lambda >= 0.0)) throw cvx::InvalidInput("lambda must be nonnegative");

    cvx::traj::FlowConfig cfg;
    cfg.step = a.step;
    cfg.horizon = a.horizon;
    cfg.log_every = a.log_every;

    Json report;
    report["schema_version"] = 1;
    report["command"] = "flow";
    Json jcfg;
    jcfg["arch"] = a.arch;
    jcfg["data"] = a.data;
    jcfg["weights"] = a.weights;
    jcfg["lambda"] = a.lambda;
    jcfg["step"] = a.step;
    jcfg["horizon"] = a.horizon;
    jcfg["log_every"] = a.log_every;
    jcfg["seed"] = a.seed;
    report["config"] = jcfg;

    cvx::traj::TrajectoryRecord rec;
    try {
        rec = cvx::traj::gradient_flow(arch, w0, loaded.data, a.lambda, cfg);
    } catch (const cvx::traj::TrajectoryDivergence& e) {
        if (!a.csv.empty()) write_trajectory_csv(e.partial, a.csv);
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    }
    if (!a.csv.empty()) write_trajectory_csv(rec, a.csv);
    if (!a.save_weights.empty()) save_weights_file(rec.final_weights, a.save_weights);

    report["trajectory"] = trajectory_summary(rec);
    report["integrator_step"] = rec.step;
    if (a.gronwall) {
        Json jg;
        if (rec.t0 && rec.C) {
            const auto g = cvx::traj::gronwall_check(rec, *rec.C, *rec.t0);
            jg["C"] = *rec.C;
            jg["from_time"] = g.from_time;
            jg["worst_ratio"] = g.worst_ratio;
            jg["tol"] = g.tol;
            jg["holds"] = g.holds;
        } else {
            jg["holds"] = nullptr;
        }
        report["gronwall"] = jg;
    }
    emit_report(report, a.out, timer.seconds(), jobs);
    return 0;
}

struct SgdArgs {
    std::string arch, data, weights = "random", out, csv_prefix, save_weights;
    bool header = false;
    double lambda = 0.0, radius = 0.0;
    int batch = 0, epochs = 0, log_every = 1, trials = 1;
    std::vector<std::string> rates{"0.05"};
    double percentile = 10.0;
    std::uint64_t seed = 1;
    int jobs = 0;
};

int run_sgd(const SgdArgs& a) {
    Timer timer;
    const int jobs = resolve_jobs(a.jobs);
    cvx::Architecture arch(parse_widths(a.arch, ','));
    LoadedData loaded = load_data(a.data, a.header, a.seed);
    if (a.radius > 0.0)
        loaded.data = cvx::Dataset::with_declared_radius(loaded.data.inputs(),
                                                         loaded.data.labels(), a.radius);
    if (a.trials < 1) throw cvx::InvalidInput("need at least one trial");

    std::vector<cvx::traj::RatePiece> schedule;
    for (const std::string& r : a.rates) {
        const auto colon = r.find(':');
        cvx::traj::RatePiece piece;
        if (colon == std::string::npos) {
            piece.from_step = 0;
            piece.rate = std::stod(r);
        } else {
            piece.from_step = std::stol(r.substr(0, colon));
            piece.rate = std::stod(r.substr(colon + 1));
        }
        schedule.push_back(piece);
    }

    Json report;
    report["schema_version"] = 1;
    report["command"] = "sgd";
    Json jcfg;
    jcfg["arch"] = a.arch;
    jcfg["data"] = a.data;
    jcfg["weights"] = a.weights;
    jcfg["lambda"] = a.lambda;
    jcfg["batch"] = a.batch;
    jcfg["epochs"] = a.epochs;
    jcfg["log_every"] = a.log_every;
    jcfg["trials"] = a.trials;
    jcfg["seed"] = a.seed;
    jcfg["percentile"] = a.percentile;
    Json jrates = Json::array();
    for (const auto& r : a.rates) jrates.push_back(r);
    jcfg["rates"] = jrates;
    report["config"] = jcfg;

    std::vector<cvx::traj::TrajectoryRecord> records;
    Json trials_json = Json::array();
    for (int trial = 0; trial < a.trials; ++trial) {
        const std::uint64_t trial_seed = a.seed + static_cast<std::uint64_t>(trial);
        cvx::traj::SgdConfig cfg;
        cfg.batch_size = a.batch;
        cfg.epochs = a.epochs;
        cfg.schedule = schedule;
        cfg.seed = trial_seed;
        cfg.log_every = a.log_every;
        const cvx::Weights w0 =
            make_weights(a.weights, arch, trial_seed, loaded);
        cvx::traj::TrajectoryRecord rec;
        try {
            rec = cvx::traj::sgd_train(arch, w0, loaded.data, a.lambda, cfg);
        } catch (const cvx::traj::TrajectoryDivergence& e) {
            if (!a.csv_prefix.empty())
                write_trajectory_csv(e.partial,
                                     a.csv_prefix + std::to_string(trial_seed) + ".csv");
            std::cerr << "divergence in trial " << trial << ": " << e.what() << "\n";
            return 3;
        }
        if (!a.csv_prefix.empty())
            write_trajectory_csv(rec, a.csv_prefix + std::to_string(trial_seed) + ".csv");
        if (!a.save_weights.empty() && trial == 0)
            save_weights_file(rec.final_weights, a.save_weights);

        Json jt = trajectory_summary(rec);
        jt["seed"] = trial_seed;
        trials_json.push_back(jt);
        records.push_back(std::move(rec));
    }
    report["trials"] = trials_json;

    const auto stat = cvx::traj::percentile_stat(records, a.percentile);
    Json jstat;
    jstat["p"] = a.percentile;
    Json per = Json::array();
    for (const auto& v : stat.per_trial)
        per.push_back(v ? Json(*v) : Json(nullptr));
    jstat["per_trial"] = per;
    jstat["mean"] = stat.mean ? Json(*stat.mean) : Json(nullptr);
    jstat["stdev"] = stat.stdev ? Json(*stat.stdev) : Json(nullptr);
    report["normalized_percentile"] = jstat;

    int with_t0 = 0;
    double frac_sum = 0.0;
    int frac_count = 0;
    for (const auto& rec : records) {
        if (rec.t0) ++with_t0;
        const auto f = cvx::traj::loss_change_fraction(rec);
        if (f) {
            frac_sum += *f;
            ++frac_count;
        }
    }
    Json agg;
    agg["trials_with_t0"] = with_t0;
    agg["loss_fraction_mean"] = frac_count > 0 ? Json(frac_sum / frac_count) : Json(nullptr);
    report["aggregate"] = agg;

    emit_report(report, a.out, timer.seconds(), jobs);
    return 0;
}

struct LinearAuditArgs {
    std::string arch, data, out;
    bool header = false;
    double lambda = 0.0, radius = 0.0;
    int starts = 32;
    std::string angles = "0.001,0.1,0.5,1.5707963267948966";
    std::uint64_t seed = 1;
    int jobs = 0;
};

int run_linear_audit(const LinearAuditArgs& a) {
    Timer timer;
    const int jobs = resolve_jobs(a.jobs);
    cvx::Architecture arch(parse_widths(a.arch, ','));
    LoadedData loaded = load_data(a.data, a.header, a.seed);
    if (a.radius > 0.0)
        loaded.data = cvx::Dataset::with_declared_radius(loaded.data.inputs(),
                                                         loaded.data.labels(), a.radius);
    if (!(a.lambda > 0.0)) throw cvx::InvalidInput("lambda must be positive");

    Json report;
    report["schema_version"] = 1;
    report["command"] = "linear-audit";
    Json jcfg;
    jcfg["arch"] = a.arch;
    jcfg["data"] = a.data;
    jcfg["lambda"] = a.lambda;
    jcfg["starts"] = a.starts;
    jcfg["seed"] = a.seed;
    report["config"] = jcfg;

    const auto found =
        cvx::linear::critical_search(arch, loaded.data, a.lambda, a.starts, a.seed);
    int offenders = 0;
    Json jpoints = Json::array();
    const cvx::Weights* audit_target = nullptr;
    for (const auto& fp : found) {
        Json jp;
        jp["value"] = fp.value;
        jp["grad_norm"] = fp.grad_norm;
        jp["norm"] = fp.norm;
        jp["near_critical"] = fp.near_critical;
        jp["in_region"] = fp.in_region;
        jpoints.push_back(jp);
        if (fp.near_critical && fp.in_region && fp.norm > 1e-6) ++offenders;
        if (!audit_target && fp.near_critical && fp.norm > 1e-6) audit_target = &fp.w;
    }
    report["points"] = jpoints;
    report["nonzero_in_region"] = offenders;

    std::vector<double> angle_list;
    for (const std::string& s : split(a.angles, ',')) angle_list.push_back(std::stod(s));
    Json jd;
    bool synthetic = false;
    cvx::Weights target = cvx::Weights::zeros(arch);
    if (audit_target) {
        target = *audit_target;
    } else {
        target = cvx::Weights::gaussian(arch, cvx::rng::splitmix(a.seed + 17), 0.5);
        synthetic = true;
    }
    const auto audit =
        cvx::linear::degeneracy_audit(arch, target, loaded.data, a.lambda, angle_list, a.seed);
    jd["applicable"] = audit.applicable;
    jd["layer"] = audit.layer;
    jd["checks"] = audit.checks;
    jd["max_rel_dev"] = audit.max_rel_dev;
    jd["passes"] = audit.passes;
    jd["synthetic_point"] = synthetic;
    report["degeneracy_audit"] = jd;

    const bool pass = offenders == 0;
    report["pass"] = pass;
    emit_report(report, a.out, timer.seconds(), jobs);
    return pass ? 0 : 2;
}

struct PlotArgs {
    std::vector<std::string> csv;
    std::string series_out, hist_out;
    double clip = 10.0;
    int bins = 10;
};

int run_plot(const PlotArgs& a) {
    if (a.series_out.empty() && a.hist_out.empty())
        throw cvx::InvalidInput("plot needs --series and/or --hist output paths");
    if (a.csv.empty()) throw cvx::InvalidInput("plot needs at least one --csv input");

    if (!a.series_out.empty()) {
        const auto rec = read_trajectory_csv(a.csv.front());
        std::vector<double> t, loss_v;
        std::vector<std::optional<double>> norm_v;
        for (const auto& s : rec.samples) {
            t.push_back(s.t);
            loss_v.push_back(s.loss);
            norm_v.push_back(s.normalized);
        }
        cvx::plot::write_time_series(a.series_out, t, loss_v, norm_v, a.clip);
    }
    if (!a.hist_out.empty()) {
        std::vector<double> fractions;
        for (const std::string& path : a.csv) {
            const auto rec = read_trajectory_csv(path);
            const auto f = cvx::traj::loss_change_fraction(rec);
            if (f) fractions.push_back(*f);
        }
        if (fractions.empty())
            throw cvx::InvalidInput("no trajectory produced a loss change fraction");
        cvx::plot::write_histogram(a.hist_out, fractions, a.bins, 0.0, 1.0,
                                   "loss change fraction");
    }
    return 0;
}

// --config FILE holds flat `key=value` lines (key = long option name without
// the dashes; `#`/`;` comments allowed; values may be quoted). Expanded here
// into --key=value arguments before CLI11 parses, so explicit flags always
// win over the file.
void expand_config_args(std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw cvx::InvalidInput("--config needs a file path");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return;

    std::ifstream in(path);
    if (!in) throw cvx::InvalidInput("cannot open config file: " + path);

    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::vector<std::string> given;
    for (const std::string& a : args)
        if (a.rfind("--", 0) == 0) given.push_back(a.substr(0, a.find('=')));

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw cvx::InvalidInput("config line " + std::to_string(lineno) +
                                    ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty())
            throw cvx::InvalidInput("config line " + std::to_string(lineno) + ": empty key");
        std::string value = trim(t.substr(eq + 1));
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\'')))
            value = value.substr(1, value.size() - 2);
        const std::string flag = "--" + key;
        if (std::find(given.begin(), given.end(), flag) != given.end()) continue;
        args.push_back(flag + "=" + value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certification and curvature diagnostics for ReLU loss surfaces"};
    app.require_subcommand(1);

    CertifyArgs ca;
    CLI::App* certify = app.add_subcommand("certify", "membership, Hessian floor, audits");
    std::string config_doc;  // consumed before parse; registered for --help only
    certify->add_option("--config", config_doc, "key=value file; explicit flags win");
    certify->add_option("--arch", ca.arch, "layer widths, e.g. 2,4,1")->required();
    certify->add_option("--data", ca.data, "csv:|idx:|teacher: data spec")->required();
    certify->add_flag("--header", ca.header, "csv has a header row");
    certify->add_option("--lambda", ca.lambda, "weight decay")->required();
    certify->add_option("--theta", ca.theta, "curvature target")->required();
    certify->add_option("--radius", ca.radius, "declared input radius override");
    certify->add_option("--weights", ca.weights, "zero|random[:scale]|teacher|file:path");
    certify->add_option("--seed", ca.seed, "random seed");
    certify->add_option("--audit-trials", ca.audit_trials, "curvature floor audit trials");
    certify->add_option("--probe-samples", ca.probe_samples, "isolation probe count");
    certify->add_option("--probe-radius", ca.probe_radius, "isolation probe radius");
    certify->add_option("--probe-grad-tol", ca.probe_grad_tol, "critical point tolerance");
    certify->add_option("--hessian-cap", ca.hessian_cap, "dense Hessian size cap");
    certify->add_option("--out", ca.out, "report path (default: stdout)");
    certify->add_option("--jobs", ca.jobs, "worker threads")->envname("CONVEXITY_LAB_JOBS");

    FlowArgs fa;
    CLI::App* flow = app.add_subcommand("flow", "gradient-flow integration with diagnostics");
    flow->add_option("--config", config_doc, "key=value file; explicit flags win");
    flow->add_option("--arch", fa.arch)->required();
    flow->add_option("--data", fa.data)->required();
    flow->add_flag("--header", fa.header);
    flow->add_option("--lambda", fa.lambda)->required();
    flow->add_option("--radius", fa.radius);
    flow->add_option("--weights", fa.weights);
    flow->add_option("--seed", fa.seed);
    flow->add_option("--step", fa.step, "integrator step (0 = auto)");
    flow->add_option("--horizon", fa.horizon, "final time");
    flow->add_option("--log-every", fa.log_every, "steps between logged samples");
    flow->add_flag("--gronwall", fa.gronwall, "check the decay bound on [t0, t1]");
    flow->add_option("--csv", fa.csv, "trajectory CSV output");
    flow->add_option("--save-weights", fa.save_weights, "final weights output");
    flow->add_option("--out", fa.out);
    flow->add_option("--jobs", fa.jobs)->envname("CONVEXITY_LAB_JOBS");

    SgdArgs sa;
    CLI::App* sgd = app.add_subcommand("sgd", "mini-batch training with diagnostics");
    sgd->add_option("--config", config_doc, "key=value file; explicit flags win");
    sgd->add_option("--arch", sa.arch)->required();
    sgd->add_option("--data", sa.data)->required();
    sgd->add_flag("--header", sa.header);
    sgd->add_option("--lambda", sa.lambda)->required();
    sgd->add_option("--radius", sa.radius);
    sgd->add_option("--weights", sa.weights);
    sgd->add_option("--seed", sa.seed);
    sgd->add_option("--batch", sa.batch, "mini-batch size")->required();
    sgd->add_option("--epochs", sa.epochs)->required();
    sgd->add_option("--rate", sa.rates, "learning rate, or from_step:rate pieces");
    sgd->add_option("--log-every", sa.log_every, "steps between logged samples");
    sgd->add_option("--trials", sa.trials, "independent seeds");
    sgd->add_option("--percentile", sa.percentile, "in-regime percentile to report");
    sgd->add_option("--csv-prefix", sa.csv_prefix, "per-trial CSV path prefix");
    sgd->add_option("--save-weights", sa.save_weights, "final weights of trial 0");
    sgd->add_option("--out", sa.out);
    sgd->add_option("--jobs", sa.jobs)->envname("CONVEXITY_LAB_JOBS");

    LinearAuditArgs la;
    CLI::App* lin = app.add_subcommand("linear-audit",
                                       "critical-point search and rotation degeneracy audit");
    lin->add_option("--config", config_doc, "key=value file; explicit flags win");
    lin->add_option("--arch", la.arch)->required();
    lin->add_option("--data", la.data)->required();
    lin->add_flag("--header", la.header);
    lin->add_option("--lambda", la.lambda)->required();
    lin->add_option("--radius", la.radius);
    lin->add_option("--starts", la.starts);
    lin->add_option("--angles", la.angles, "comma-separated rotation angles");
    lin->add_option("--seed", la.seed);
    lin->add_option("--out", la.out);
    lin->add_option("--jobs", la.jobs)->envname("CONVEXITY_LAB_JOBS");

    PlotArgs pa;
    CLI::App* plot = app.add_subcommand("plot", "render trajectory CSVs to SVG");
    plot->add_option("--csv", pa.csv, "trajectory CSV inputs")->required();
    plot->add_option("--series", pa.series_out, "time-series SVG path (first CSV)");
    plot->add_option("--hist", pa.hist_out, "loss-fraction histogram SVG path");
    plot->add_option("--clip", pa.clip, "normalized-curve ceiling");
    plot->add_option("--bins", pa.bins, "histogram bins");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        expand_config_args(args);
        std::reverse(args.begin(), args.end());  // CLI11 takes reversed vectors
        app.parse(args);
        if (certify->parsed()) return run_certify(ca);
        if (flow->parsed()) return run_flow(fa);
        if (sgd->parsed()) return run_sgd(sa);
        if (lin->parsed()) return run_linear_audit(la);
        if (plot->parsed()) return run_plot(pa);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const cvx::traj::TrajectoryDivergence& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const cvx::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
