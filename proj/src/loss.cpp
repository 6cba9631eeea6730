#include "convexity/loss.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "convexity/errors.hpp"
#include "convexity/net.hpp"
#include "convexity/parallel.hpp"

namespace cvx::loss {

namespace {

// Activations and switch masks of one sample. With sig == nullptr the masks
// come from the sign of each pre-activation (true forward, x = relu(z));
// otherwise the recorded bits are applied to the raw pre-activations.
struct Trace {
    std::vector<Eigen::VectorXd> x;  // x_0 .. x_{H+1}
    std::vector<Eigen::VectorXd> m;  // m[i] masks level i+1, entries 0/1
};

void run_forward(const Architecture& arch, const Weights& w, const Eigen::Ref<const Eigen::VectorXd>& a,
                 const SwitchSignature* sig, int sample, Trace& tr) {
    const int L = arch.matrix_count();
    tr.x.resize(L + 1);
    tr.m.resize(L);
    tr.x[0] = a;
    for (int i = 0; i < L; ++i) {
        Eigen::VectorXd z = w.mat(i).transpose() * tr.x[i];
        Eigen::VectorXd& m = tr.m[i];
        m.resize(z.size());
        if (sig) {
            for (int u = 0; u < z.size(); ++u) m(u) = sig->bit(sample, i + 1, u) ? 1.0 : 0.0;
        } else {
            for (int u = 0; u < z.size(); ++u) m(u) = z(u) > 0.0 ? 1.0 : 0.0;
        }
        tr.x[i + 1] = m.cwiseProduct(z);
    }
}

// Residual sum of squares over one block.
double block_sq_error(const Architecture& arch, const Weights& w, const Dataset& data,
                      const SwitchSignature* sig, int lo, int hi) {
    Trace tr;
    double acc = 0.0;
    for (int s = lo; s < hi; ++s) {
        run_forward(arch, w, data.input(s), sig, s, tr);
        const double e = tr.x.back()(0) - data.label(s);
        acc += e * e;
    }
    return acc;
}

// Unregularized gradient contribution of samples [lo, hi), seeded with the
// raw residual e (the 1/N scale is applied by the caller).
void block_gradient(const Architecture& arch, const Weights& w, const Dataset& data,
                    const SwitchSignature* sig, int lo, int hi, Weights& out) {
    Trace tr;
    const int L = arch.matrix_count();
    for (int s = lo; s < hi; ++s) {
        run_forward(arch, w, data.input(s), sig, s, tr);
        const double e = tr.x.back()(0) - data.label(s);
        Eigen::VectorXd c(1);
        c(0) = e;
        for (int i = L - 1; i >= 0; --i) {
            const Eigen::VectorXd d = tr.m[i].cwiseProduct(c);
            out.mat(i).noalias() += tr.x[i] * d.transpose();
            if (i > 0) c = w.mat(i) * d;
        }
    }
}

// Forward-over-reverse Hessian-vector contribution of [lo, hi) on the frozen
// piece, again up to the 1/N scale.
void block_hvp(const Architecture& arch, const Weights& w, const Dataset& data,
               const SwitchSignature* sig, const Direction& dir, int lo, int hi, Weights& out) {
    Trace tr;
    const int L = arch.matrix_count();
    std::vector<Eigen::VectorXd> xd(L + 1);
    for (int s = lo; s < hi; ++s) {
        run_forward(arch, w, data.input(s), sig, s, tr);
        xd[0] = Eigen::VectorXd::Zero(tr.x[0].size());
        for (int i = 0; i < L; ++i) {
            Eigen::VectorXd zd = w.mat(i).transpose() * xd[i];
            zd.noalias() += dir.mat(i).transpose() * tr.x[i];
            xd[i + 1] = tr.m[i].cwiseProduct(zd);
        }
        Eigen::VectorXd c(1), cd(1);
        c(0) = tr.x.back()(0) - data.label(s);  // residual e
        cd(0) = xd[L](0);                       // tangent of the output
        for (int i = L - 1; i >= 0; --i) {
            const Eigen::VectorXd d = tr.m[i].cwiseProduct(c);
            const Eigen::VectorXd dd = tr.m[i].cwiseProduct(cd);
            out.mat(i).noalias() += xd[i] * d.transpose();
            out.mat(i).noalias() += tr.x[i] * dd.transpose();
            if (i > 0) {
                Eigen::VectorXd cn = w.mat(i) * d;
                Eigen::VectorXd cdn = dir.mat(i) * d;
                cdn.noalias() += w.mat(i) * dd;
                c = std::move(cn);
                cd = std::move(cdn);
            }
        }
    }
}

// Sum over samples of (dy)^2 + e d2y for the frozen piece, where dy and d2y
// come from single and ordered-pair insertions of the direction.
double block_dir_second(const Architecture& arch, const Weights& w, const Dataset& data,
                        const SwitchSignature* sig, const Direction& dir, int lo, int hi) {
    Trace tr;
    const int L = arch.matrix_count();
    double acc = 0.0;
    for (int s = lo; s < hi; ++s) {
        run_forward(arch, w, data.input(s), sig, s, tr);
        const double e = tr.x.back()(0) - data.label(s);

        double dy = 0.0;
        for (int ins = 0; ins < L; ++ins) {
            Eigen::VectorXd v = tr.m[ins].cwiseProduct(dir.mat(ins).transpose() * tr.x[ins]);
            for (int j = ins + 1; j < L; ++j) v = tr.m[j].cwiseProduct(w.mat(j).transpose() * v);
            dy += v(0);
        }

        double d2y = 0.0;
        for (int j = 0; j + 1 < L; ++j) {
            // t tracks the level-(i) value of the single insertion at j.
            Eigen::VectorXd t = tr.m[j].cwiseProduct(dir.mat(j).transpose() * tr.x[j]);
            for (int i = j + 1; i < L; ++i) {
                Eigen::VectorXd sdot = tr.m[i].cwiseProduct(dir.mat(i).transpose() * t);
                for (int k = i + 1; k < L; ++k)
                    sdot = tr.m[k].cwiseProduct(w.mat(k).transpose() * sdot);
                d2y += sdot(0);
                if (i + 1 < L) t = tr.m[i].cwiseProduct(w.mat(i).transpose() * t);
            }
        }
        d2y *= 2.0;

        acc += dy * dy + e * d2y;
    }
    return acc;
}

double block_laplacian(const Architecture& arch, const Weights& w, const Dataset& data,
                       const SwitchSignature* sig, int lo, int hi) {
    Trace tr;
    const int L = arch.matrix_count();
    double acc = 0.0;
    for (int s = lo; s < hi; ++s) {
        run_forward(arch, w, data.input(s), sig, s, tr);
        Eigen::VectorXd c(1);
        c(0) = 1.0;
        for (int i = L - 1; i >= 0; --i) {
            const Eigen::VectorXd d = tr.m[i].cwiseProduct(c);
            acc += tr.x[i].squaredNorm() * d.squaredNorm();
            if (i > 0) c = w.mat(i) * d;
        }
    }
    return acc;
}

double reduce_sq_error(const Architecture& arch, const Weights& w, const Dataset& data,
                       const SwitchSignature* sig) {
    const int n = data.size();
    const int nb = par::num_blocks(n);
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b)
        partial[b] = block_sq_error(arch, w, data, sig, par::block_lo(b), par::block_hi(b, n));
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

Weights reduce_gradient(const Architecture& arch, const Weights& w, const Dataset& data,
                        const SwitchSignature* sig, double lambda) {
    check_shape(arch, w);
    if (data.input_dim() != arch.width(0)) throw InvalidInput("dataset dimension mismatch");
    if (!(lambda >= 0.0)) throw InvalidInput("weight decay must be nonnegative");
    const int n = data.size();
    const int nb = par::num_blocks(n);
    std::vector<Weights> partial(nb, Weights::zeros(arch));
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b)
        block_gradient(arch, w, data, sig, par::block_lo(b), par::block_hi(b, n), partial[b]);
    Weights g = Weights::zeros(arch);
    for (const auto& p : partial) g += p;
    g *= 1.0 / n;
    g.add_scaled(w, lambda);
    return g;
}

Weights reduce_hvp(const Architecture& arch, const Weights& w, const Dataset& data,
                   const SwitchSignature* sig, double lambda, const Direction& dir) {
    check_shape(arch, w);
    check_shape(arch, dir);
    if (!(lambda >= 0.0)) throw InvalidInput("weight decay must be nonnegative");
    const int n = data.size();
    const int nb = par::num_blocks(n);
    std::vector<Weights> partial(nb, Weights::zeros(arch));
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b)
        block_hvp(arch, w, data, sig, dir, par::block_lo(b), par::block_hi(b, n), partial[b]);
    Weights h = Weights::zeros(arch);
    for (const auto& p : partial) h += p;
    h *= 1.0 / n;
    h.add_scaled(dir, lambda);
    return h;
}

double reduce_dir_second(const Architecture& arch, const Weights& w, const Dataset& data,
                         const SwitchSignature* sig, double lambda, const Direction& dir) {
    check_shape(arch, w);
    check_shape(arch, dir);
    if (!(lambda >= 0.0)) throw InvalidInput("weight decay must be nonnegative");
    const int n = data.size();
    const int nb = par::num_blocks(n);
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b)
        partial[b] =
            block_dir_second(arch, w, data, sig, dir, par::block_lo(b), par::block_hi(b, n));
    double total = 0.0;
    for (double p : partial) total += p;
    return total / n + lambda * dir.squared_norm();
}

double reduce_laplacian(const Architecture& arch, const Weights& w, const Dataset& data,
                        const SwitchSignature* sig) {
    check_shape(arch, w);
    const int n = data.size();
    const int nb = par::num_blocks(n);
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b)
        partial[b] = block_laplacian(arch, w, data, sig, par::block_lo(b), par::block_hi(b, n));
    double total = 0.0;
    for (double p : partial) total += p;
    return total / n;
}

}  // namespace

double value(const Architecture& arch, const Weights& w, const Dataset& data) {
    check_shape(arch, w);
    if (data.input_dim() != arch.width(0)) throw InvalidInput("dataset dimension mismatch");
    return reduce_sq_error(arch, w, data, nullptr) / (2.0 * data.size());
}

double regularized_value(const Architecture& arch, const Weights& w, const Dataset& data,
                         double lambda) {
    if (!(lambda >= 0.0)) throw InvalidInput("weight decay must be nonnegative");
    return value(arch, w, data) + 0.5 * lambda * w.squared_norm();
}

Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda) {
    return reduce_gradient(arch, w, data, nullptr, lambda);
}

Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda,
                 double eps_b, bool& boundary_warning) {
    boundary_warning = net::switch_signature(arch, w, data, eps_b).any_boundary();
    return reduce_gradient(arch, w, data, nullptr, lambda);
}

Weights gradient_subset(const Architecture& arch, const Weights& w, const Dataset& data,
                        double lambda, const int* idx, int count) {
    check_shape(arch, w);
    if (count < 1) throw InvalidInput("gradient over an empty subset");
    if (!(lambda >= 0.0)) throw InvalidInput("weight decay must be nonnegative");
    Weights g = Weights::zeros(arch);
    Trace tr;
    const int L = arch.matrix_count();
    for (int k = 0; k < count; ++k) {
        const int s = idx[k];
        if (s < 0 || s >= data.size()) throw InvalidInput("subset index out of range");
        run_forward(arch, w, data.input(s), nullptr, s, tr);
        const double e = tr.x.back()(0) - data.label(s);
        Eigen::VectorXd c(1);
        c(0) = e;
        for (int i = L - 1; i >= 0; --i) {
            const Eigen::VectorXd d = tr.m[i].cwiseProduct(c);
            g.mat(i).noalias() += tr.x[i] * d.transpose();
            if (i > 0) c = w.mat(i) * d;
        }
    }
    g *= 1.0 / count;
    g.add_scaled(w, lambda);
    return g;
}

Weights hvp(const Architecture& arch, const Weights& w, const Dataset& data, double lambda,
            const Direction& dir) {
    return reduce_hvp(arch, w, data, nullptr, lambda, dir);
}

double directional_second(const Architecture& arch, const Weights& w, const Dataset& data,
                          double lambda, const Direction& dir) {
    return reduce_dir_second(arch, w, data, nullptr, lambda, dir);
}

double laplacian(const Architecture& arch, const Weights& w, const Dataset& data) {
    return reduce_laplacian(arch, w, data, nullptr);
}

double frozen_value(const Architecture& arch, const Weights& w, const Dataset& data,
                    const SwitchSignature& sig) {
    check_shape(arch, w);
    return reduce_sq_error(arch, w, data, &sig) / (2.0 * data.size());
}

double frozen_regularized(const Architecture& arch, const Weights& w, const Dataset& data,
                          const SwitchSignature& sig, double lambda) {
    return frozen_value(arch, w, data, sig) + 0.5 * lambda * w.squared_norm();
}

Weights frozen_gradient(const Architecture& arch, const Weights& w, const Dataset& data,
                        const SwitchSignature& sig, double lambda) {
    return reduce_gradient(arch, w, data, &sig, lambda);
}

Weights frozen_hvp(const Architecture& arch, const Weights& w, const Dataset& data,
                   const SwitchSignature& sig, double lambda, const Direction& dir) {
    return reduce_hvp(arch, w, data, &sig, lambda, dir);
}

double frozen_laplacian(const Architecture& arch, const Weights& w, const Dataset& data,
                        const SwitchSignature& sig) {
    return reduce_laplacian(arch, w, data, &sig);
}

Eigen::MatrixXd full_hessian(const Architecture& arch, const Weights& w, const Dataset& data,
                             double lambda, int max_params, double* asymmetry) {
    check_shape(arch, w);
    const int m = arch.param_count();
    if (m > max_params)
        throw ResourceError("dense Hessian of " + std::to_string(m) +
                            " parameters exceeds the cap of " + std::to_string(max_params) +
                            "; use hvp-based bounds instead");
    Eigen::MatrixXd h(m, m);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m; ++j)
        h.col(j) = hvp(arch, w, data, lambda, Weights::coordinate(arch, j)).to_flat();
    const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry) *asymmetry = asym;
    h = ((h + h.transpose()) * 0.5).eval();
    return h;
}

EigenFloor min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw InvalidInput("matrix must be square");
    EigenFloor out;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    out.symmetry_defect = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (out.symmetry_defect > 1e-8 * scale)
        throw InvalidInput("matrix is not symmetric within tolerance");
    const Eigen::MatrixXd sym = (m + m.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw ResourceError("eigensolver failed to converge");
    out.min_eigenvalue = solver.eigenvalues()(0);
    const Eigen::VectorXd v = solver.eigenvectors().col(0);
    out.residual = (sym * v - out.min_eigenvalue * v).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace cvx::loss
