#pragma once

#include <certbayes/errors.hpp>
#include <certbayes/model.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace certbayes {

enum class MetricKind { Unit, Diagonal, Dense };

/**
 * Fixed-length HMC. Warmup adapts the step size by dual averaging toward
 * `target_accept` and, unless `metric` is Unit, estimates the inverse metric
 * from expanding windows of warmup draws (75 / 25-doubling / 50 buffers,
 * shrunk proportionally for short warmups).
 */
struct HmcConfig
{
    int n_samples = 4000;
    int n_warmup = 2000;
    int leapfrog_steps = 32;
    double target_accept = 0.8;
    std::uint64_t seed = 0;
    MetricKind metric = MetricKind::Dense;
    double step_jitter = 0.2; // each trajectory draws its step from eps*(1 +- jitter), warmup included

    void validate() const
    {
        detail::require(n_samples > 0 && n_warmup > 0 && leapfrog_steps > 0, ErrorCode::InvalidArgument,
                        "HMC sample, warmup and leapfrog counts must be positive");
        detail::require(target_accept > 0.5 && target_accept < 0.99, ErrorCode::InvalidArgument,
                        "target_accept must lie in (0.5, 0.99), got " + std::to_string(target_accept));
        detail::require(step_jitter >= 0 && step_jitter < 1, ErrorCode::InvalidArgument,
                        "step_jitter must lie in [0, 1)");
    }
};

namespace detail {

/// Nesterov dual averaging of log step size.
class DualAverage
{
public:
    DualAverage(double eps0, double target) : target_(target) { restart(eps0); }

    void restart(double eps0)
    {
        mu_ = std::log(10 * eps0);
        log_eps_ = std::log(eps0);
        log_eps_bar_ = 0;
        h_bar_ = 0;
        m_ = 0;
    }

    double update(double accept_prob)
    {
        ++m_;
        const double w = 1.0 / (m_ + t0_);
        h_bar_ = (1 - w) * h_bar_ + w * (target_ - accept_prob);
        log_eps_ = mu_ - std::sqrt(m_) / gamma_ * h_bar_;
        const double eta = std::pow(m_, -kappa_);
        log_eps_bar_ = eta * log_eps_ + (1 - eta) * log_eps_bar_;
        return std::exp(log_eps_);
    }

    double final_step() const { return std::exp(log_eps_bar_); }

private:
    double target_;
    double mu_ = 0, log_eps_ = 0, log_eps_bar_ = 0, h_bar_ = 0, m_ = 0;
    static constexpr double gamma_ = 0.05, t0_ = 10, kappa_ = 0.75;
};

/// Inverse metric Sigma; momentum is N(0, Sigma^{-1}).
template <typename Scalar>
class Metric
{
public:
    using Vector = VectorX<Scalar>;

    Metric(MetricKind kind, Eigen::Index dim) : kind_(kind), diag_(Vector::Ones(dim)), chol_(MatrixX<Scalar>::Identity(dim, dim)) {}

    void set_covariance(const MatrixX<Scalar>& cov)
    {
        if (kind_ == MetricKind::Diagonal) {
            diag_ = cov.diagonal();
        } else if (kind_ == MetricKind::Dense) {
            Eigen::LLT<MatrixX<Scalar>> llt(cov);
            if (llt.info() == Eigen::Success) chol_ = llt.matrixL();
        }
    }

    template <typename Rng>
    Vector draw_momentum(Rng& rng) const
    {
        std::normal_distribution<double> normal;
        Vector z(diag_.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = Scalar(normal(rng));
        switch (kind_) {
            case MetricKind::Unit: return z;
            case MetricKind::Diagonal: return z.cwiseQuotient(diag_.cwiseSqrt());
            case MetricKind::Dense: return chol_.transpose().template triangularView<Eigen::Upper>().solve(z);
        }
        return z;
    }

    Vector velocity(const Vector& p) const
    {
        switch (kind_) {
            case MetricKind::Unit: return p;
            case MetricKind::Diagonal: return diag_.cwiseProduct(p);
            case MetricKind::Dense:
                return chol_.template triangularView<Eigen::Lower>() * (chol_.transpose() * p);
        }
        return p;
    }

    Scalar kinetic(const Vector& p) const
    {
        switch (kind_) {
            case MetricKind::Unit: return Scalar(0.5) * p.squaredNorm();
            case MetricKind::Diagonal: return Scalar(0.5) * p.cwiseProduct(diag_).dot(p);
            case MetricKind::Dense: return Scalar(0.5) * (chol_.transpose() * p).squaredNorm();
        }
        return 0;
    }

private:
    MetricKind kind_;
    Vector diag_;
    MatrixX<Scalar> chol_;
};

template <typename Scalar>
class Welford
{
public:
    explicit Welford(Eigen::Index dim) : mean_(VectorX<Scalar>::Zero(dim)), m2_(MatrixX<Scalar>::Zero(dim, dim)) {}

    void add(const VectorX<Scalar>& x)
    {
        ++n_;
        const VectorX<Scalar> delta = x - mean_;
        mean_ += delta / Scalar(n_);
        m2_ += delta * (x - mean_).transpose();
    }

    void reset()
    {
        n_ = 0;
        mean_.setZero();
        m2_.setZero();
    }

    /// Sample covariance shrunk toward 1e-3 * I.
    MatrixX<Scalar> regularized() const
    {
        const Scalar n = Scalar(n_);
        MatrixX<Scalar> cov = m2_ / std::max(n - 1, Scalar(1));
        cov = (n / (n + 5)) * cov;
        cov.diagonal().array() += Scalar(1e-3) * (5 / (n + 5));
        return cov;
    }

    long count() const { return n_; }

private:
    long n_ = 0;
    VectorX<Scalar> mean_;
    MatrixX<Scalar> m2_;
};

template <typename Scalar>
struct PhasePoint
{
    VectorX<Scalar> q, p, grad;
    Scalar logp;
};

/// Stan-style slow-adaptation windows.
struct WindowSchedule
{
    int init_buffer = 75, term_buffer = 50, base_window = 25;
    int warmup;
    bool enabled;
    int window_size;
    int next_end;

    explicit WindowSchedule(int n_warmup) : warmup(n_warmup), enabled(n_warmup >= 20)
    {
        if (init_buffer + term_buffer + base_window > warmup) {
            init_buffer = int(0.15 * warmup);
            term_buffer = int(0.1 * warmup);
            base_window = warmup - init_buffer - term_buffer;
        }
        window_size = base_window;
        next_end = init_buffer + base_window - 1;
    }

    bool in_window(int it) const
    {
        return enabled && it >= init_buffer && it < warmup - term_buffer;
    }

    bool window_end(int it) const { return in_window(it) && it == next_end; }

    void advance(int it)
    {
        const int last = warmup - term_buffer - 1;
        if (next_end == last) return;
        window_size *= 2;
        next_end = it + window_size;
        if (next_end != last && next_end + 2 * window_size >= warmup - term_buffer) next_end = last;
    }
};

} // namespace detail

/**
 * Draws `config.n_samples` states after `config.n_warmup` adaptation
 * iterations, starting at the origin. `target(q, grad)` returns log p(q) and
 * writes its gradient. Deterministic for a given seed.
 *
 * A transition whose energy error exceeds 1000 (or is not finite) is a
 * divergence and is rejected. Too many divergences (50 in a row, or more
 * than 10% of the sampling phase) abort with DivergentTrajectory.
 */
template <typename Scalar, typename Target>
SampleSet<Scalar> hmc_sample(const Target& target, Eigen::Index dim, const HmcConfig& config)
{
    using Vector = VectorX<Scalar>;
    detail::require(dim >= 1, ErrorCode::InvalidArgument, "HMC dimension must be >= 1");
    config.validate();

    constexpr double max_energy_error = 1000;
    const int max_consecutive = 50;
    const int max_sampling_divergences = std::max(10, config.n_samples / 10);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    detail::Metric<Scalar> metric(config.metric, dim);

    detail::PhasePoint<Scalar> cur{Vector::Zero(dim), Vector::Zero(dim), Vector::Zero(dim), 0};
    cur.logp = target(cur.q, cur.grad);
    detail::require(std::isfinite(double(cur.logp)) && cur.grad.allFinite(), ErrorCode::NonFiniteDensity,
                    "log density or gradient is not finite at the origin");

    // L leapfrog steps from `pt`; returns the energy error, +inf on blow-up.
    auto integrate = [&](detail::PhasePoint<Scalar>& pt, double eps, int steps) -> double {
        const Scalar h0 = -pt.logp + metric.kinetic(pt.p);
        const Scalar e = Scalar(eps);
        for (int l = 0; l < steps; ++l) {
            pt.p += Scalar(0.5) * e * pt.grad;
            pt.q += e * metric.velocity(pt.p);
            pt.logp = target(pt.q, pt.grad);
            if (!std::isfinite(double(pt.logp)) || !pt.grad.allFinite())
                return std::numeric_limits<double>::infinity();
            pt.p += Scalar(0.5) * e * pt.grad;
        }
        const double dh = double(-pt.logp + metric.kinetic(pt.p) - h0);
        return std::isfinite(dh) ? dh : std::numeric_limits<double>::infinity();
    };

    auto reasonable_step = [&](double eps) {
        const double log_target = std::log(0.8);
        auto neg_dh = [&](double e) {
            detail::PhasePoint<Scalar> pt = cur;
            pt.p = metric.draw_momentum(rng);
            return -integrate(pt, e, 1);
        };
        double d = neg_dh(eps);
        const int direction = d > log_target ? 1 : -1;
        for (int i = 0; i < 100; ++i) {
            if (direction == 1 && !(d > log_target)) break;
            if (direction == -1 && !(d < log_target)) break;
            const double next = direction == 1 ? 2 * eps : eps / 2;
            if (next > 1e7 || next < 1e-10) break;
            eps = next;
            d = neg_dh(eps);
        }
        return eps;
    };

    int consecutive = 0;
    int divergences = 0;
    auto transition = [&](double eps, bool sampling) -> double {
        detail::PhasePoint<Scalar> prop = cur;
        prop.p = metric.draw_momentum(rng);
        const double dh = integrate(prop, eps, config.leapfrog_steps);
        if (!(dh <= max_energy_error)) {
            ++consecutive;
            if (sampling) ++divergences;
            detail::require(consecutive < max_consecutive, ErrorCode::DivergentTrajectory,
                            std::to_string(consecutive) + " consecutive divergent trajectories");
            detail::require(divergences <= max_sampling_divergences, ErrorCode::DivergentTrajectory,
                            std::to_string(divergences) + " divergent trajectories during sampling");
            return 0.0;
        }
        consecutive = 0;
        const double accept = dh <= 0 ? 1.0 : std::exp(-dh);
        if (unif(rng) < accept) cur = std::move(prop);
        return accept;
    };

    double eps = reasonable_step(1.0);
    detail::DualAverage da(eps, config.target_accept);
    detail::WindowSchedule windows(config.n_warmup);
    const bool adapt_metric = config.metric != MetricKind::Unit && windows.enabled;
    detail::Welford<Scalar> welford(dim);

    // The last stretch of warmup replaces dual averaging by a damped
    // Robbins-Monro recursion on log eps, averaged over its second half.
    // Jitter applies here too, so the target refers to the jittered sampler.
    // Dual-averaging iterates keep fluctuating by O(1) in log eps, and in low
    // dimension the averaged step then lands well above the target acceptance.
    const int calibrate_from = config.n_warmup - std::max(1, windows.enabled ? windows.term_buffer : config.n_warmup / 2);
    double log_eps = 0, log_eps_sum = 0;
    int calib_k = 0, averaged = 0;

    for (int it = 0; it < config.n_warmup; ++it) {
        const double accept = transition(eps * (1 + config.step_jitter * (2 * unif(rng) - 1)), false);
        if (it < calibrate_from) {
            eps = da.update(accept);
        } else {
            if (it == calibrate_from) log_eps = std::log(da.final_step());
            ++calib_k;
            log_eps += 0.5 * (accept - config.target_accept) / std::sqrt(calib_k + 10.0);
            // never wander far past the averaged step: near the stability edge
            // the acceptance curve can cross the target a second time
            log_eps = std::min(log_eps, std::log(1.5 * da.final_step()));
            eps = std::exp(log_eps);
            if (2 * calib_k > config.n_warmup - calibrate_from) {
                log_eps_sum += log_eps;
                ++averaged;
            }
        }
        if (adapt_metric && windows.in_window(it)) {
            welford.add(cur.q);
            if (windows.window_end(it)) {
                metric.set_covariance(welford.regularized());
                welford.reset();
                eps = reasonable_step(eps);
                da.restart(eps);
                windows.advance(it);
            }
        }
    }
    eps = averaged > 0 ? std::exp(log_eps_sum / averaged) : da.final_step();

    SampleSet<Scalar> out;
    out.seed = config.seed;
    out.step_size = eps;
    out.draws.resize(config.n_samples, dim);
    double accept_sum = 0;
    for (int it = 0; it < config.n_samples; ++it) {
        const double jittered = eps * (1 + config.step_jitter * (2 * unif(rng) - 1));
        accept_sum += transition(jittered, true);
        out.draws.row(it) = cur.q.transpose();
    }
    out.acceptance_rate = accept_sum / config.n_samples;
    out.divergences = divergences;
    return out;
}

/// Convenience overload for a RobustGibbsTarget-like object with value_and_gradient().
template <typename Scalar, typename Model>
SampleSet<Scalar> hmc_sample_model(const Model& model, const HmcConfig& config)
{
    auto target = [&model](const VectorX<Scalar>& q, VectorX<Scalar>& g) { return model.value_and_gradient(q, g); };
    return hmc_sample<Scalar>(target, model.dim(), config);
}

/// Separate log-density and gradient callables.
template <typename Scalar, typename LogDensity, typename Gradient>
SampleSet<Scalar> hmc_sample(const LogDensity& logdensity, const Gradient& grad, Eigen::Index dim,
                             const HmcConfig& config)
{
    auto target = [&](const VectorX<Scalar>& q, VectorX<Scalar>& g) {
        g = grad(q);
        return logdensity(q);
    };
    return hmc_sample<Scalar>(target, dim, config);
}

/**
 * Independent chains with seeds config.seed + chain index, run on up to
 * `jobs` threads. The target must be safe to call concurrently.
 */
template <typename Scalar, typename Target>
std::vector<SampleSet<Scalar>> hmc_sample_chains(const Target& target, Eigen::Index dim, const HmcConfig& config,
                                                 int chains, int jobs = 1)
{
    detail::require(chains >= 1, ErrorCode::InvalidArgument, "need at least one chain");
    std::vector<SampleSet<Scalar>> out(chains);
    std::vector<std::exception_ptr> errors(chains);
    auto run = [&](int c) {
        try {
            HmcConfig cfg = config;
            cfg.seed = config.seed + std::uint64_t(c);
            out[c] = hmc_sample<Scalar>(target, dim, cfg);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    jobs = std::clamp(jobs, 1, chains);
    for (int start = 0; start < chains; start += jobs) {
        std::vector<std::thread> pool;
        for (int c = start; c < std::min(chains, start + jobs); ++c) pool.emplace_back(run, c);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

/// Stacks chains in order into one SampleSet; diagnostics are averaged.
template <typename Scalar>
SampleSet<Scalar> merge_chains(const std::vector<SampleSet<Scalar>>& chains)
{
    detail::require(!chains.empty(), ErrorCode::Empty, "no chains to merge");
    SampleSet<Scalar> out;
    Eigen::Index rows = 0;
    for (const auto& c : chains) rows += c.size();
    out.draws.resize(rows, chains.front().dim());
    Eigen::Index at = 0;
    for (const auto& c : chains) {
        out.draws.middleRows(at, c.size()) = c.draws;
        at += c.size();
        out.acceptance_rate += c.acceptance_rate / chains.size();
        out.step_size += c.step_size / chains.size();
        out.divergences += c.divergences;
    }
    out.seed = chains.front().seed;
    return out;
}

} // namespace certbayes
