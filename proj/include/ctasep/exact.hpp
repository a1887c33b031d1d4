#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctasep::exact {

/// All configurations of Ω_{N,k} as bitmasks (bit x = site x), in increasing
/// numeric order.
class StateSpace {
 public:
  StateSpace(int n_sites, int particles, std::size_t cap = 200000);

  int n_sites() const noexcept { return n_; }
  int particles() const noexcept { return k_; }
  std::size_t size() const noexcept { return states_.size(); }
  std::uint64_t state(std::size_t i) const { return states_.at(i); }
  const std::vector<std::uint64_t>& states() const noexcept { return states_; }
  /// Throws when the mask is not a state of the space.
  std::size_t index(std::uint64_t mask) const;

  std::string to_string(std::uint64_t mask) const;
  std::uint64_t parse(const std::string& bits) const;

  std::uint64_t rotate(std::uint64_t mask, int shift) const noexcept;
  /// η'(x) = 1 - η(-x)
  std::uint64_t particle_hole(std::uint64_t mask) const noexcept;

 private:
  int n_;
  int k_;
  std::vector<std::uint64_t> states_;
};

template <class Scalar>
using Generator = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

struct Chain {
  StateSpace space;
  Generator<double> Q;
  double max_exit_rate;
};

Chain build(int n_sites, int particles, std::size_t cap = 200000);

/// Rows of e^{tQ} applied to the columns of dist0 (each column a probability
/// vector), by uniformization with Λ = max exit rate. Poisson terms stop once
/// the remaining mass is below tol.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> transient_block(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& dist0, const Generator<Scalar>& Qt,
    Scalar rate, Scalar t, Scalar tol) {
  using std::exp;
  using std::lgamma;
  using std::log;
  if (t < Scalar(0)) throw std::invalid_argument("transient needs t >= 0");
  if (t == Scalar(0) || rate == Scalar(0)) return dist0;
  const Scalar a = rate * t;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> v = dist0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = dist0;
  out.setZero();
  Scalar mass(0);
  for (long n = 0;; ++n) {
    const Scalar w = exp(-a + Scalar(n) * log(a) - lgamma(Scalar(n + 1)));
    out.noalias() += w * v;
    mass += w;
    if (Scalar(n) > a && Scalar(1) - mass < tol) break;
    if (n > 100 + static_cast<long>(a + 40 * std::sqrt(static_cast<double>(a)))) break;
    v = v + (Qt * v) / rate;
  }
  return out;
}

/// Single distribution version; dist0 and result are column vectors.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> transient(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& dist0,
                                                   const Generator<Scalar>& Q, Scalar t, Scalar tol) {
  Scalar rate(0);
  for (int r = 0; r < Q.outerSize(); ++r) rate = std::max(rate, -Q.coeff(r, r));
  const Generator<Scalar> Qt = Q.transpose();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> block = dist0;
  return transient_block<Scalar>(block, Qt, rate, t, tol).col(0);
}

template <class Derived>
typename Derived::Scalar tv_to_uniform(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  const Scalar u = Scalar(1) / Scalar(p.size());
  return (p.array() - u).abs().sum() / Scalar(2);
}

struct TVCurve {
  std::vector<double> times;
  std::vector<double> values;
};

struct MixingReport {
  double epsilon;
  double t_mix;
  std::string worst_state;  // initial state attaining the maximum at t_mix
};

/// Worst-case total variation over initial states. Up to N = 14 every rotation
/// orbit is represented; above, clustered blocks plus 64 random states.
class WorstCase {
 public:
  explicit WorstCase(const Chain& chain, double tol = 1e-13, std::uint64_t seed = 1);

  std::size_t candidates() const noexcept { return starts_.size(); }
  bool exhaustive() const noexcept { return exhaustive_; }

  TVCurve curve(const std::vector<double>& times) const;
  /// inf{t : d(t) <= ε} to absolute time tolerance time_tol, for each ε.
  std::vector<MixingReport> mixing_times(std::vector<double> epsilons, double time_tol = 1e-10) const;

 private:
  using Block = Eigen::MatrixXd;
  Block evolve(const Block& m, double t) const;
  std::pair<double, std::size_t> worst(const Block& m) const;

  const Chain& chain_;
  Generator<double> qt_;
  double tol_;
  bool exhaustive_;
  std::vector<std::uint64_t> starts_;
};

double mixing_time(int n_sites, int particles, double epsilon, double time_tol = 1e-10);

/// Exact pmf of the particle count in a window of length L under μ_{N,k}.
std::vector<double> window_count_law(int n_sites, int particles, int window_len);

struct CutoffRow {
  int n_sites;
  int particles;
  double t_early;  // t_mix(1 - ε)
  double t_late;   // t_mix(ε)
  double ratio;    // t_late / t_early
};

std::vector<CutoffRow> no_cutoff_profile(const std::vector<int>& n_list, const std::function<int(int)>& k_rule,
                                         double epsilon, double time_tol = 1e-10);

}  // namespace ctasep::exact
