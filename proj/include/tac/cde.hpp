#pragma once

// Conditional density estimation by boosting.
//
// The label range is split into k+1 bins by breakpoints b_0 < b_1 < ... <
// b_k <= b_{k+1}. A boosted ensemble of decision stumps learns, for every
// interior breakpoint j, a score f(x, j) whose logistic transform estimates
// P(y >= b_j | x). Scores are monotonized in j before use so that the bin
// probabilities form a valid survival curve.

#include <cmath>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace tac::cde {

// Unknown feature values are represented as NaN.
inline constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();
inline bool is_unknown(double v) { return std::isnan(v); }

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t num_features() const { return features.empty() ? feature_names.size() : features.front().size(); }
  void add(std::vector<double> x, double y);
  // Throws std::invalid_argument on ragged rows or non-finite labels.
  void validate() const;
};

// Header row of feature names followed by the label column; an empty field is
// an Unknown feature value.
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Dataset& data, const std::string& label_name = "label");
void write_csv_file(const std::string& path, const Dataset& data, const std::string& label_name = "label");

struct Breakpoints {
  std::vector<double> b;  // b_0 .. b_{k+1}
  bool degenerate = false;  // all labels equal

  int k() const { return static_cast<int>(b.size()) - 2; }
};

// Interior breakpoints are chosen among the distinct labels so that the bin
// frequencies q_j minimize sum q_j ln q_j. With fewer than k+1 distinct
// labels every distinct label becomes a breakpoint.
Breakpoints compute_breakpoints(const std::vector<double>& labels, int k);

// sum_j q_j ln q_j of the bins induced by `bp` on `labels`.
double bin_entropy_objective(const std::vector<double>& labels, const Breakpoints& bp);

// Index of the bin containing y: number of interior breakpoints <= y.
int bin_of(const Breakpoints& bp, double y);

struct Stump {
  int feature = 0;
  double threshold = -std::numeric_limits<double>::infinity();  // -inf: every known value goes to A
  std::vector<double> a;  // feature >= threshold
  std::vector<double> b;  // feature < threshold
  std::vector<double> c;  // feature unknown

  const std::vector<double>& block(double v) const;
};

struct StumpChoice {
  Stump stump;
  double objective = 0.0;  // sum_{i,j} W(i,j) exp(-s_j(y_i) h(x_i, j))
};

// Exhaustive stump search. `weights` is m x k row-major; `bins[i]` is the bin
// of example i, so s_j(y_i) = +1 iff j <= bins[i] (j counted from 1).
StumpChoice best_stump(const std::vector<double>& weights, const Dataset& data, const std::vector<int>& bins,
                       int k, double smoothing);

// Average of the tightest nonincreasing upper and lower envelopes.
std::vector<double> monotonize(const std::vector<double>& scores);

struct TrainOptions {
  int k = 50;
  int rounds = 300;
  double smoothing = -1.0;  // negative: 1 / (2m)
};

class CdeModel {
 public:
  CdeModel() = default;
  CdeModel(Breakpoints bp, std::vector<Stump> stumps, int num_features);

  const Breakpoints& breakpoints() const { return bp_; }
  const std::vector<Stump>& stumps() const { return stumps_; }
  int k() const { return bp_.k(); }
  int num_features() const { return num_features_; }
  bool degenerate() const { return bp_.degenerate; }
  bool empty() const { return bp_.b.empty(); }

  std::vector<double> raw_scores(const std::vector<double>& x) const;
  // p_0 .. p_{k+1}: p_j estimates P(y >= b_j | x).
  std::vector<double> predict_cdf(const std::vector<double>& x) const;
  // P(y <= t | x), uniform within bins.
  double cdf(const std::vector<double>& x, double t) const;
  double sample(const std::vector<double>& x, std::mt19937_64& rng) const;
  double expected_value(const std::vector<double>& x) const;
  // E[max(0, y) | x] under the same piecewise-uniform law.
  double expected_positive_part(const std::vector<double>& x) const;

  std::string to_json() const;
  static CdeModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static CdeModel load(const std::string& path);

 private:
  void check_input(const std::vector<double>& x) const;

  Breakpoints bp_;
  std::vector<Stump> stumps_;
  int num_features_ = 0;
};

struct TrainResult {
  CdeModel model;
  std::vector<double> loss;  // logistic loss before round 1 and after each round
};

TrainResult train(const Dataset& data, const TrainOptions& options);

// Sum over examples and interior breakpoints of ln(1 + exp(-s f)).
double logistic_loss(const CdeModel& model, const Dataset& data);

}  // namespace tac::cde
