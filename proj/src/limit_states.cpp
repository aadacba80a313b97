#include "raresim/limit_state.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "raresim/sampling.hpp"

namespace raresim {

double g11(const Vector& theta) {
    const double d = static_cast<double>(theta.size());
    return 4.0 - theta.sum() / std::sqrt(d);
}

double g12(const Vector& theta, double kappa) {
    if (theta.size() < 2)
        throw std::invalid_argument("g12 requires dimension >= 2");
    const double quad = theta[0] - theta[1];
    return g11(theta) - 0.25 * kappa * quad * quad;
}

double g2_four_branch(const Vector& theta) {
    if (theta.size() != 2)
        throw std::invalid_argument("g2_four_branch requires dimension 2");
    const double t1 = theta[0], t2 = theta[1];
    const double diff2 = (t1 - t2) * (t1 - t2);
    const double s = (t1 + t2) / std::sqrt(2.0);
    const double b1 = 3.0 + 0.1 * diff2 - s;
    const double b2 = 3.0 + 0.1 * diff2 + s;
    const double b3 = t1 - t2 + 7.0 / std::sqrt(2.0);
    const double b4 = t2 - t1 + 7.0 / std::sqrt(2.0);
    return std::min(std::min(b1, b2), std::min(b3, b4));
}

double g3_hypersphere(const Vector& theta, double tau, double nu) {
    const double r = theta.norm();
    const double q = r / tau;
    const double qn = std::pow(q, nu);
    return 1.0 - q * q - (theta[0] / tau) * ((1.0 - qn) / (1.0 + qn));
}

double loading_psi(const Vector& theta, const OscillatorConfig& cfg, double t) {
    const std::size_t half = cfg.d / 2;
    const double dw = cfg.delta_w();
    double acc = 0.0;
    for (std::size_t n = 1; n <= half; ++n) {
        const double w = static_cast<double>(n) * dw;
        acc += theta[static_cast<long>(n - 1)] * std::cos(w * t) +
               theta[static_cast<long>(half + n - 1)] * std::sin(w * t);
    }
    return -cfg.m0 * cfg.S_w() * acc;
}

namespace {

struct OscState {
    double u, v, z;
};

// Bouc-Wen rate equations for the displacement u, velocity v, and the
// hysteresis variable z.
OscState rates(const OscState& s, double psi, const OscillatorConfig& cfg) {
    const double a = cfg.damping();
    const double restoring =
        cfg.a0 * (cfg.alpha * s.u + (1.0 - cfg.alpha) * cfg.u_y * s.z);
    const double acc = (psi - a * s.v - restoring) / cfg.m0;
    const double az = std::abs(s.z);
    const double zn1 = cfg.n_bw == 1.0 ? 1.0 : std::pow(az, cfg.n_bw - 1.0);
    const double zn = zn1 * az;
    const double zdot = (s.v - cfg.beta_w * std::abs(s.v) * zn1 * s.z -
                         cfg.gamma_w * s.v * zn) /
                        cfg.u_y;
    return {s.v, acc, zdot};
}

template <typename Loading>
double integrate_oscillator(const Loading& psi, const OscillatorConfig& cfg) {
    const std::size_t steps = cfg.n_time * cfg.substeps;
    const double dt = cfg.t_end / static_cast<double>(steps);
    OscState s{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double p0 = psi(t);
        const double ph = psi(t + 0.5 * dt);
        const double p1 = psi(t + dt);
        const OscState k1 = rates(s, p0, cfg);
        const OscState k2 =
            rates({s.u + 0.5 * dt * k1.u, s.v + 0.5 * dt * k1.v, s.z + 0.5 * dt * k1.z},
                  ph, cfg);
        const OscState k3 =
            rates({s.u + 0.5 * dt * k2.u, s.v + 0.5 * dt * k2.v, s.z + 0.5 * dt * k2.z},
                  ph, cfg);
        const OscState k4 =
            rates({s.u + dt * k3.u, s.v + dt * k3.v, s.z + dt * k3.z}, p1, cfg);
        s.u += dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
        s.v += dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
        s.z += dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
        if (!std::isfinite(s.u) || !std::isfinite(s.v) || !std::isfinite(s.z))
            throw std::runtime_error("g4_oscillator: integration diverged");
    }
    return s.u + cfg.failure_offset;
}

}  // namespace

double g4_oscillator(const Vector& theta, const OscillatorConfig& cfg) {
    if (static_cast<std::size_t>(theta.size()) != cfg.d)
        throw std::invalid_argument("g4_oscillator: wrong input dimension");
    return integrate_oscillator(
        [&](double t) { return loading_psi(theta, cfg, t); }, cfg);
}

double g4_oscillator_from_loading(const Vector& psi_grid,
                                  const OscillatorConfig& cfg) {
    if (static_cast<std::size_t>(psi_grid.size()) != cfg.n_time)
        throw std::invalid_argument("g4_oscillator_from_loading: wrong grid size");
    const double h = cfg.t_end / static_cast<double>(cfg.n_time - 1);
    auto psi = [&](double t) {
        const double x = std::min(std::max(t / h, 0.0),
                                  static_cast<double>(cfg.n_time - 1));
        const long i = std::min(static_cast<long>(x),
                                static_cast<long>(cfg.n_time) - 2);
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * psi_grid[i] + w * psi_grid[i + 1];
    };
    return integrate_oscillator(psi, cfg);
}

PcaLoadingModel pca_loading_reduction(const OscillatorConfig& cfg,
                                      std::size_t n_realizations, RngStream& rng) {
    if (n_realizations < cfg.n_time)
        throw std::invalid_argument(
            "pca_loading_reduction: need at least n_time realizations");
    const long m = static_cast<long>(cfg.n_time);
    const double h = cfg.t_end / static_cast<double>(cfg.n_time - 1);

    Matrix real(static_cast<long>(n_realizations), m);
    for (long i = 0; i < real.rows(); ++i) {
        Vector theta(static_cast<long>(cfg.d));
        for (long k = 0; k < theta.size(); ++k) theta[k] = rng.normal();
        for (long j = 0; j < m; ++j)
            real(i, j) = loading_psi(theta, cfg, h * static_cast<double>(j));
    }

    PcaLoadingModel model;
    model.mean = real.colwise().mean();
    Matrix centered = real.rowwise() - model.mean.transpose();
    Matrix cov = centered.transpose() * centered /
                 static_cast<double>(n_realizations - 1);
    cov = 0.5 * (cov + cov.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("pca_loading_reduction: eigendecomposition failed");
    // reorder to descending eigenvalues
    model.eigvalues = Vector(m);
    model.eigvectors = Matrix(m, m);
    for (long j = 0; j < m; ++j) {
        model.eigvalues[j] = std::max(es.eigenvalues()[m - 1 - j], 0.0);
        model.eigvectors.col(j) = es.eigenvectors().col(m - 1 - j);
    }

    Matrix projected = centered * model.eigvectors;
    model.comp_scales = Vector(m);
    for (long j = 0; j < m; ++j) {
        const double var = projected.col(j).squaredNorm() /
                           static_cast<double>(n_realizations - 1);
        model.comp_scales[j] = std::sqrt(std::max(var, 0.0));
    }
    model.time_grid.resize(cfg.n_time);
    for (std::size_t j = 0; j < cfg.n_time; ++j)
        model.time_grid[j] = h * static_cast<double>(j);
    return model;
}

std::vector<std::string> benchmark_ids() {
    return {"g11", "g12", "g2", "g3", "oscillator", "oscillator-pca"};
}

std::shared_ptr<LimitState> make_benchmark(const std::string& id,
                                           const BenchmarkOptions& opts) {
    const double shift = opts.threshold_shift;
    if (id == "g11") {
        return std::make_shared<LimitState>(
            opts.d, [shift](const Vector& t) { return g11(t) - shift; }, id);
    }
    if (id == "g12") {
        const double kappa = opts.kappa;
        return std::make_shared<LimitState>(
            opts.d,
            [kappa, shift](const Vector& t) { return g12(t, kappa) - shift; }, id);
    }
    if (id == "g2") {
        return std::make_shared<LimitState>(
            2, [shift](const Vector& t) { return g2_four_branch(t) - shift; }, id);
    }
    if (id == "g3") {
        const double tau = opts.tau, nu = opts.nu;
        return std::make_shared<LimitState>(
            opts.d,
            [tau, nu, shift](const Vector& t) {
                return g3_hypersphere(t, tau, nu) - shift;
            },
            id);
    }
    if (id == "oscillator") {
        OscillatorConfig cfg;
        cfg.d = opts.d == 2 ? 300 : opts.d;
        return std::make_shared<LimitState>(
            cfg.d,
            [cfg, shift](const Vector& t) { return g4_oscillator(t, cfg) - shift; },
            id);
    }
    if (id == "oscillator-pca") {
        OscillatorConfig cfg;
        RngStream pca_rng(opts.pca_seed, 0);
        auto model = std::make_shared<PcaLoadingModel>(
            pca_loading_reduction(cfg, opts.pca_realizations, pca_rng));
        return std::make_shared<LimitState>(
            cfg.n_time,
            [cfg, model, shift](const Vector& xi) {
                Vector psi = model->mean +
                             model->eigvectors *
                                 (model->comp_scales.cwiseProduct(xi));
                return g4_oscillator_from_loading(psi, cfg) - shift;
            },
            id);
    }
    throw std::invalid_argument("unknown benchmark id: " + id);
}

}  // namespace raresim
