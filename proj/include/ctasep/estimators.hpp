#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctasep/lpp.hpp"
#include "ctasep/ring.hpp"

namespace ctasep::estimators {

using lpp::Cell;
using lpp::Rational;

/// Parameter grid, replica count and root seed of one experiment. Grid points
/// are expanded in list order, so the output order never depends on threads.
struct ExperimentPlan {
  std::string name;
  std::vector<std::int64_t> n;
  std::vector<Rational> m;
  std::vector<int> n_sites;
  std::vector<int> particles;
  std::vector<double> theta;
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  std::string schema;
  unsigned threads = 1;

  void validate() const;
  /// Seed of replica r at grid point g; depends only on (seed, name, g, r).
  std::uint64_t replica_seed(std::uint64_t grid_point, std::uint64_t replica) const;
};

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double stderr_slope = 0;
  double r2 = 0;
  std::vector<double> x;
  std::vector<double> y;
};

/// Ordinary least squares y = intercept + slope·x.
FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y);
/// Fit of log y against log x.
FitResult loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);
double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

/// Shape constant (1+√m)²n.
double shape_center(double n, double m);
/// Fluctuation scale n^{1/3} m^{-1/6}.
double fluctuation_scale(double n, double m);

/// T_{0,(n,⌊mn⌋)} in an i.i.d. environment for each replica.
std::vector<double> point_to_point_samples(std::int64_t n, Rational m, const ExperimentPlan& plan,
                                           std::uint64_t grid_point = 0);

struct MomentRow {
  std::int64_t n;
  double mean;
  double variance;
};

struct MomentsResult {
  std::vector<MomentRow> rows;
  FitResult variance_fit;  // log Var against log n
};

MomentsResult lpp_moments(const std::vector<std::int64_t>& n_list, Rational m, const ExperimentPlan& plan);

struct TailRow {
  double x;
  double upper;  // P(T - center >= x·scale)
  double lower;  // P(T - center <= -x·scale)
};

struct TailProfile {
  std::int64_t n;
  double center;
  double scale;
  std::vector<TailRow> rows;
  std::optional<FitResult> upper_fit;  // log upper against x on the fit range
  std::optional<FitResult> lower_fit;  // log lower against x² on the fit range
};

TailProfile tail_profile(std::int64_t n, Rational m, const std::vector<double>& x_grid, const ExperimentPlan& plan,
                         double fit_lo = 1.0, double fit_hi = 3.0);
TailProfile tail_profile_from_samples(std::int64_t n, Rational m, const std::vector<double>& samples,
                                      const std::vector<double>& x_grid, double fit_lo, double fit_hi);

struct TFRow {
  std::int64_t n;
  double median_tf;
};

struct TFResult {
  std::vector<TFRow> rows;
  FitResult fit;
};

TFResult tf_scaling(const std::vector<std::int64_t>& n_list, Rational m, const ExperimentPlan& plan);

/// I.i.d. field equal to the periodic field on the band of k lines
/// -⌊k/2⌋ <= v2 - ⌊m v1⌋ <= ⌈k/2⌉ - 1 and to an independent field elsewhere.
class StripCoupledField {
 public:
  StripCoupledField(const lpp::Environment& periodic, const lpp::Environment& outside, Rational m);
  bool in_band(Cell v) const;
  double operator()(Cell v) const { return in_band(v) ? periodic_(v) : outside_(v); }

 private:
  lpp::Environment periodic_;
  lpp::Environment outside_;
  Rational m_;
  std::int64_t lo_;
  std::int64_t hi_;
};

struct AgreementResult {
  std::size_t agreements;
  std::size_t replicas;
  double frequency;
};

AgreementResult periodic_vs_iid_agreement(std::int64_t n, Rational m, int n_sites, int particles,
                                          const ExperimentPlan& plan, std::uint64_t grid_point = 0);

enum class PairFamily { antipodal, adjacent, random };
PairFamily parse_pair_family(const std::string& name);
std::string to_string(PairFamily f);

/// Uniform configuration with a disagreement pair of the family; the two
/// configurations differ by swapping the values at the pair's sites.
std::pair<ring::RingConfig, ring::RingConfig> sample_pair(int n_sites, int particles, PairFamily family,
                                                          std::uint64_t seed);

struct CoalescenceRow {
  int n_sites;
  int particles;
  double cap;
  std::size_t runs;
  std::size_t censored;
  double median_tau;
};

struct CoalescenceResult {
  std::vector<CoalescenceRow> rows;
  FitResult fit;  // log median τ against log N
};

/// Median coalescence time per N over the pair families; cap(N, k) bounds each
/// run. Fails when 5% or more of the runs at some N are censored.
CoalescenceResult coalescence_scaling(const std::vector<int>& n_list, const std::function<int(int)>& k_of_n,
                                      const std::vector<PairFamily>& families,
                                      const std::function<double(int, int)>& cap_rule,
                                      const ExperimentPlan& plan);

/// ½∫|f_{M,1} - f_{M,1+δ}|, Gamma(M) densities with scales 1 and 1+δ.
double gamma_tv(int shape, double delta);

struct EventFrequencyRow {
  double theta;
  Cell v;
  std::size_t runs;
  std::size_t holds;
  std::size_t violations;  // holding runs with τ > bound
  double frequency;
};

EventFrequencyRow coalescence_event_trial(int n_sites, int particles, double theta, const ExperimentPlan& plan,
                                          std::uint64_t grid_point = 0);
std::vector<EventFrequencyRow> coalescence_event_frequency(int n_sites, int particles,
                                                           const std::vector<double>& theta_list,
                                                           const ExperimentPlan& plan);

}  // namespace ctasep::estimators
