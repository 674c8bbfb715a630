#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "fjq/config.hpp"
#include "fjq/grid.hpp"

namespace fjq {

using Matrix = std::vector<std::vector<double>>;

/// Probability vector over the queue occupancy seen by an arriving packet.
/// For unbounded queues the law is geometric with parameter sigma and probs
/// holds a truncated expansion (tail mass < 1e-12).
struct QueueStateLaw {
    std::vector<double> probs;
    std::optional<double> sigma;
};

/// Pre-arrival occupancy chain of one path with capacity `cap`: row s is the
/// law of the state seen by the next arrival given the current arrival saw s.
/// After the arrival joins there are min(1+s, cap) packets present; departures
/// over one period follow a Poisson count truncated at the number present,
/// and the row's state-0 entry absorbs the residual mass.
Matrix transition_matrix(double mu, double tau, int cap);

/// Stationary law pi with pi = pi * M, solved directly; the residual
/// ||pi*M - pi||_inf must come out below 1e-12 or this throws.
QueueStateLaw steady_state(const Matrix& m);

/// Folds the state-(cap) mass onto q = cap-1: weights over the packets-ahead
/// count q = min(s, cap-1) for s ~ pi.
std::vector<double> queue_position_weights(const QueueStateLaw& pi, int cap);

/// Exact piecewise representation of the conditional delivery-time law for a
/// finite-capacity path, erasures excluded. On interval m (one per period,
/// m = 0..cap-1) the density is a combination of Erlang kernels restarted at
/// the interval edge:
///
///   f(t) = sum_k coeff[m][k] * mu * poisson_pmf(k, t - m*tau),
///
/// which the period-shift recursion preserves, so pdf/cdf/mass evaluate in
/// closed form and carry no quadrature error.
class PiecewiseErlang {
  public:
    double pdf(double t) const;   // right-limit convention at interval edges
    double cdf(double t) const;
    double mass() const { return cdf_base_.back(); }
    double tau() const { return tau_; }
    int intervals() const { return static_cast<int>(coeff_.size()); }

  private:
    friend class PathRecursion;
    double mu_ = 0.0;
    double tau_ = 0.0;
    std::vector<std::vector<double>> coeff_;  // [interval][erlang stages - 1]
    std::vector<double> cdf_base_;            // CDF at interval starts + end
};

/// Memoized per-(mu, tau) evaluation of the capacity recursions. Both the
/// dropping probability and the delivery law recurse over (remaining
/// capacity, packets ahead); instances are cheap and not thread-safe.
class PathRecursion {
  public:
    PathRecursion(double mu, double tau);

    /// p_drop(cap, q): probability that a packet entering with q ahead in a
    /// capacity-cap queue is pushed out before service. 0 <= q <= cap-1.
    double drop_prob(int cap, int q);

    /// Erasure-free delivery law given q packets ahead; multiply externally
    /// by (1 - eps) for the with-erasure law. mass() == 1 - drop_prob(cap, q).
    const PiecewiseErlang& conditional_law(int cap, int q);

    double mu() const { return mu_; }
    double tau() const { return tau_; }

  private:
    double mu_;
    double tau_;
    std::vector<double> pmf_tau_;  // poisson_pmf(d, tau) cache
    std::map<std::pair<int, int>, double> drop_memo_;
    std::map<std::pair<int, int>, std::unique_ptr<PiecewiseErlang>> law_memo_;

    double pmf_tau(int d);
};

/// Geometric parameter of the stable D/M/1 pre-arrival occupancy law: the
/// root in (0,1) of x = exp(-mu*tau*(1-x)), by bisection to |f| < 1e-12.
/// Requires mu*tau > 1. `printed_exponent` doubles the exponent coefficient
/// (the variant that appears in print); kept for comparison, the geometric
/// occupancy fit in the test suite discriminates the two.
double sigma_root(double mu, double tau, bool printed_exponent = false);

/// One path of a validated config, everything the block layer consumes.
/// Exact pdf/cdf evaluation; erasure factored in exactly once.
class PathModel {
  public:
    static PathModel finite(double mu, double eps, double tau, int cap);
    static PathModel infinite(double mu, double eps, double tau);

    bool unbounded() const { return !recursion_; }
    double eps() const { return eps_; }
    double mu() const { return mu_; }
    double tau() const { return tau_; }
    int cap() const { return cap_; }
    double sigma() const { return sigma_; }

    // unconditional delivery law (state-mixed for finite cap)
    double pdf(double t) const;
    double cdf(double t) const;
    double mass() const;

    // conditional on q packets ahead (finite cap only)
    double cond_pdf(int q, double t) const;
    double cond_cdf(int q, double t) const;
    double cond_mass(int q) const;

    const QueueStateLaw& steady() const { return steady_; }
    const std::vector<double>& position_weights() const { return weights_; }
    const std::vector<double>& drop_prob_by_state() const { return drops_; }
    double drop_prob() const { return drop_prob_; }

  private:
    double mu_ = 0.0;
    double eps_ = 0.0;
    double tau_ = 0.0;
    int cap_ = 0;                     // 0 when unbounded
    double sigma_ = 0.0;              // unbounded only
    double exp_rate_ = 0.0;           // mu * (1 - sigma), unbounded only
    QueueStateLaw steady_;
    std::vector<double> weights_;     // over q = 0..cap-1
    std::vector<double> drops_;       // p_drop(q)
    double drop_prob_ = 0.0;
    std::shared_ptr<PathRecursion> recursion_;  // finite cap only
    std::vector<const PiecewiseErlang*> laws_;  // one per q
};

/// Spec-level bundle of the per-path analysis artifacts on a grid.
struct PathAnalysis {
    int path_index = 0;
    QueueStateLaw steady_state;
    std::vector<double> drop_prob_by_state;
    double drop_prob = 0.0;
    std::vector<GridDistribution> latency_by_state;
    GridDistribution latency;
};

/// Builds the PathModel for path j of a validated config.
PathModel build_path_model(const SystemConfig& cfg, int j);

/// Grid horizon used for unbounded-queue laws: smallest multiple of tau at
/// which every path's undelivered-given-deliverable mass is below 1e-8.
double infinite_horizon(const SystemConfig& cfg);

/// Samples a PathModel onto a grid. For finite cap the support is cap*tau;
/// for unbounded queues `t_max` must be supplied (see infinite_horizon).
GridDistribution path_law_grid(const PathModel& pm, double grid_step,
                               double t_max = 0.0);

/// Full per-path analysis artifact (grid sampling of every law).
PathAnalysis analyze_path(const SystemConfig& cfg, int j, double grid_step);

}  // namespace fjq
