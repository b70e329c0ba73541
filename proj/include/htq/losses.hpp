#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "htq/bounds.hpp"
#include "htq/density_model.hpp"
#include "htq/rng.hpp"

namespace htq {

// Contiguous slice of the parameter vector quantized with its own tail fit
// and codebook (the per-layer treatment).
struct ParamGroup {
    std::string name;
    size_t begin = 0;
    size_t end = 0;  // exclusive
};

inline void validate_groups(const std::vector<ParamGroup>& groups, size_t dim) {
    require(!groups.empty(), ErrKind::OutOfRange, "need at least one parameter group");
    size_t expect = 0;
    for (const auto& g : groups) {
        require(g.begin == expect && g.end > g.begin, ErrKind::OutOfRange,
                "groups must partition [0, d) in order");
        expect = g.end;
    }
    require(expect == dim, ErrKind::OutOfRange, "groups must cover the full dimension");
}

enum class InitStyle { Constant, HeavyTail };

// ---------------------------------------------------------------------------
// Quadratic benchmark: F(theta) = 0.5 ||theta - theta*||^2 with theta* = 0,
// client gradients theta + heavy-tailed noise. Noise coordinates are i.i.d.
// symmetric draws: a uniform body on [-1, 1] carrying mass 1 - 2*rho and a
// Pareto tail with index `gamma`, optionally censored at `cutoff` (draws
// beyond the cutoff collapse onto it), then scaled so the per-sample variance
// equals sigma2 (Assumption-1 budget spread over d coordinates). The start
// point either spreads the initial distance evenly over the coordinates or
// draws it from the same heavy-tailed shape, which puts a few large entries
// into every early gradient (the per-layer picture).
// ---------------------------------------------------------------------------
class QuadraticParetoLoss {
public:
    QuadraticParetoLoss(size_t dim, double sigma2, double init_distance, double noise_gamma,
                        double noise_rho, InitStyle init_style = InitStyle::Constant,
                        uint64_t seed = 0,
                        double noise_cutoff = std::numeric_limits<double>::infinity())
        : dim_(dim),
          init_distance_(init_distance),
          init_style_(init_style),
          seed_(seed),
          gamma_(noise_gamma),
          rho_(noise_rho),
          cutoff_(noise_cutoff) {
        require(gamma_ > 1.0, ErrKind::OutOfRange, "noise tail index must exceed 1");
        require(rho_ >= 0.0 && rho_ <= 0.5, ErrKind::OutOfRange, "noise rho must be in [0, 0.5]");
        require(cutoff_ > 1.0, ErrKind::OutOfRange, "noise cutoff must exceed the body edge");
        require(std::isfinite(cutoff_) || gamma_ > 3.0, ErrKind::OutOfRange,
                "uncensored noise needs gamma > 3 for a finite variance");
        noise_scale_ = std::sqrt(sigma2 / static_cast<double>(dim)) / std::sqrt(unit_variance());
    }

    size_t dim() const { return dim_; }
    double optimal_value() const { return 0.0; }

    std::vector<double> initial_theta() const {
        if (init_style_ == InitStyle::Constant) {
            double coord = init_distance_ / std::sqrt(static_cast<double>(dim_));
            return std::vector<double>(dim_, coord);
        }
        Rng rng(seed_, "init-theta");
        std::vector<double> theta(dim_);
        double norm_sq = 0.0;
        for (auto& v : theta) {
            v = sample(rng);
            norm_sq += v * v;
        }
        double scale = init_distance_ / std::sqrt(norm_sq);
        for (auto& v : theta) v *= scale;
        return theta;
    }

    double loss(const std::vector<double>& theta) const {
        double acc = 0.0;
        for (double v : theta) acc += v * v;
        return 0.5 * acc;
    }

    void full_gradient(const std::vector<double>& theta, std::vector<double>& out) const {
        out = theta;
    }

    // Mini-batch gradient for one client: theta + mean of `batch` noise draws
    // per coordinate. All randomness flows through `rng`.
    void client_gradient(const std::vector<double>& theta, int /*client*/, int batch, Rng& rng,
                         std::vector<double>& out) const {
        out.resize(dim_);
        for (size_t j = 0; j < dim_; ++j) {
            double acc = 0.0;
            for (int b = 0; b < batch; ++b) acc += noise_scale_ * sample(rng);
            out[j] = theta[j] + acc / batch;
        }
    }

    std::vector<ParamGroup> default_groups() const { return {{"all", 0, dim_}}; }

    std::vector<size_t> shard_sizes(int n_clients) const {
        return std::vector<size_t>(static_cast<size_t>(n_clients), 1);
    }

private:
    // unscaled draw: uniform body, inverse-CDF Pareto tail censored at cutoff
    double sample(Rng& rng) const {
        double u = rng.u01();
        double sign = u < 0.5 ? -1.0 : 1.0;
        double m = std::abs(2.0 * u - 1.0);
        double body_mass = 1.0 - 2.0 * rho_;
        if (m < body_mass) return sign * (m / body_mass);
        double q = (m - body_mass) / (2.0 * rho_);
        double x = std::pow(1.0 - q, -1.0 / (gamma_ - 1.0));
        return sign * std::min(x, cutoff_);
    }

    double unit_variance() const {
        double body = (1.0 - 2.0 * rho_) / 3.0;
        if (!std::isfinite(cutoff_))
            return body + 2.0 * rho_ * (gamma_ - 1.0) / (gamma_ - 3.0);
        // censored tail: integral up to the cutoff plus the point mass on it
        double xm = cutoff_;
        double integral = gamma_ == 3.0
                              ? 2.0 * std::log(xm)
                              : (gamma_ - 1.0) * (std::pow(xm, 3.0 - gamma_) - 1.0) / (3.0 - gamma_);
        double pile = std::pow(xm, 3.0 - gamma_);
        return body + 2.0 * rho_ * (integral + pile);
    }

    size_t dim_;
    double init_distance_;
    InitStyle init_style_;
    uint64_t seed_;
    double gamma_;
    double rho_;
    double cutoff_;
    double noise_scale_ = 1.0;
};

// ---------------------------------------------------------------------------
// Synthetic logistic regression: labels from a ground-truth separator,
// features in two blocks of different scale so the two parameter groups see
// different gradient distributions. Clients hold shards of different sizes
// (exercises data-proportional weights).
// ---------------------------------------------------------------------------
class LogisticSyntheticLoss {
public:
    LogisticSyntheticLoss(size_t dim, int n_clients, int samples_per_client, double scale_hi,
                          uint64_t seed, double label_noise = 0.05)
        : dim_(dim) {
        Rng rng(seed, "logistic-data");
        theta_true_.resize(dim_);
        for (size_t j = 0; j < dim_; ++j)
            theta_true_[j] = rng.normal() * 2.0 / std::sqrt(static_cast<double>(dim_));
        shard_sizes_.resize(static_cast<size_t>(n_clients));
        for (int i = 0; i < n_clients; ++i)
            shard_sizes_[static_cast<size_t>(i)] =
                static_cast<size_t>(samples_per_client + i * samples_per_client / 4);
        size_t total = 0;
        for (size_t m : shard_sizes_) total += m;
        features_.resize(total * dim_);
        labels_.resize(total);
        shard_offsets_.resize(shard_sizes_.size() + 1, 0);
        for (size_t i = 0; i < shard_sizes_.size(); ++i)
            shard_offsets_[i + 1] = shard_offsets_[i] + shard_sizes_[i];
        for (size_t r = 0; r < total; ++r) {
            double logit = 0.0;
            for (size_t j = 0; j < dim_; ++j) {
                double scale = j < dim_ / 2 ? 1.0 : scale_hi;
                double x = rng.normal() * scale;
                features_[r * dim_ + j] = x;
                logit += x * theta_true_[j];
            }
            labels_[r] = rng.u01() < 1.0 / (1.0 + std::exp(-logit)) ? 1.0 : -1.0;
            // flipped labels keep gradients alive once the separator saturates
            if (rng.u01() < label_noise) labels_[r] = -labels_[r];
        }
    }

    size_t dim() const { return dim_; }

    std::vector<double> initial_theta() const { return std::vector<double>(dim_, 0.0); }

    double loss(const std::vector<double>& theta) const {
        double acc = 0.0;
        size_t total = labels_.size();
        for (size_t r = 0; r < total; ++r) {
            double m = -labels_[r] * dot(theta, r);
            // log(1 + exp(m)) without overflow
            acc += m > 30.0 ? m : std::log1p(std::exp(m));
        }
        return acc / static_cast<double>(total);
    }

    void full_gradient(const std::vector<double>& theta, std::vector<double>& out) const {
        out.assign(dim_, 0.0);
        size_t total = labels_.size();
        for (size_t r = 0; r < total; ++r) add_sample_gradient(theta, r, 1.0 / total, out);
    }

    void client_gradient(const std::vector<double>& theta, int client, int batch, Rng& rng,
                         std::vector<double>& out) const {
        out.assign(dim_, 0.0);
        size_t lo = shard_offsets_[static_cast<size_t>(client)];
        size_t hi = shard_offsets_[static_cast<size_t>(client) + 1];
        for (int b = 0; b < batch; ++b) {
            size_t r = lo + static_cast<size_t>(rng.u01() * static_cast<double>(hi - lo));
            if (r >= hi) r = hi - 1;
            add_sample_gradient(theta, r, 1.0 / batch, out);
        }
    }

    std::vector<ParamGroup> default_groups() const {
        if (dim_ < 2) return {{"all", 0, dim_}};
        return {{"low_scale", 0, dim_ / 2}, {"high_scale", dim_ / 2, dim_}};
    }

    std::vector<size_t> shard_sizes(int n_clients) const {
        require(static_cast<size_t>(n_clients) == shard_sizes_.size(), ErrKind::DimensionMismatch,
                "client count changed after data generation");
        return shard_sizes_;
    }

private:
    double dot(const std::vector<double>& theta, size_t row) const {
        double acc = 0.0;
        for (size_t j = 0; j < dim_; ++j) acc += theta[j] * features_[row * dim_ + j];
        return acc;
    }

    void add_sample_gradient(const std::vector<double>& theta, size_t row, double weight,
                             std::vector<double>& out) const {
        double y = labels_[row];
        double s = 1.0 / (1.0 + std::exp(y * dot(theta, row)));  // sigmoid(-y x.theta)
        double c = -y * s * weight;
        for (size_t j = 0; j < dim_; ++j) out[j] += c * features_[row * dim_ + j];
    }

    size_t dim_;
    std::vector<double> theta_true_;
    std::vector<double> features_;
    std::vector<double> labels_;
    std::vector<size_t> shard_sizes_;
    std::vector<size_t> shard_offsets_;
};

}  // namespace htq
