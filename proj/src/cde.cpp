#include "tac/cde.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tac::cde {
namespace {

constexpr int kModelVersion = 1;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ln(1 + e^{-z}) without overflow.
double softplus_neg(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

// sum W e^{-s h} over one block with the smoothed optimal h.
inline double block_objective(double wp, double wm, double eps) {
  const double r = std::sqrt((wm + eps) / (wp + eps));
  return wp * r + wm / r;
}

inline double block_value(double wp, double wm, double eps) { return 0.5 * std::log((wp + eps) / (wm + eps)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

// Known examples of each feature, sorted by value (stable in example index),
// plus the unknown ones.
struct FeatureOrder {
  std::vector<int> known;
  std::vector<int> unknown;
};

std::vector<FeatureOrder> sort_features(const Dataset& data) {
  const int nf = static_cast<int>(data.num_features());
  const int m = static_cast<int>(data.size());
  std::vector<FeatureOrder> orders(nf);
  for (int f = 0; f < nf; ++f) {
    for (int i = 0; i < m; ++i) {
      (is_unknown(data.features[i][f]) ? orders[f].unknown : orders[f].known).push_back(i);
    }
    std::stable_sort(orders[f].known.begin(), orders[f].known.end(),
                     [&](int a, int b) { return data.features[a][f] < data.features[b][f]; });
  }
  return orders;
}

StumpChoice search(const std::vector<double>& weights, const Dataset& data, const std::vector<int>& bins, int k,
                   double eps, const std::vector<FeatureOrder>& orders) {
  const int nf = static_cast<int>(data.num_features());
  std::vector<double> tp(k, 0.0), tm(k, 0.0);
  const int m = static_cast<int>(data.size());
  for (int i = 0; i < m; ++i) {
    const double* w = &weights[static_cast<std::size_t>(i) * k];
    for (int j = 0; j < k; ++j) (j < bins[i] ? tp[j] : tm[j]) += w[j];
  }

  StumpChoice best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> up(k), um(k), kp(k), km(k), lp(k), lm(k);
  for (int f = 0; f < nf; ++f) {
    const FeatureOrder& ord = orders[f];
    std::fill(up.begin(), up.end(), 0.0);
    std::fill(um.begin(), um.end(), 0.0);
    for (int i : ord.unknown) {
      const double* w = &weights[static_cast<std::size_t>(i) * k];
      for (int j = 0; j < k; ++j) (j < bins[i] ? up[j] : um[j]) += w[j];
    }
    double unknown_obj = 0.0;
    for (int j = 0; j < k; ++j) {
      kp[j] = std::max(0.0, tp[j] - up[j]);
      km[j] = std::max(0.0, tm[j] - um[j]);
      unknown_obj += block_objective(up[j], um[j], eps);
    }

    auto consider = [&](double threshold, double obj) {
      if (obj < best.objective) {
        best.objective = obj;
        best.stump.feature = f;
        best.stump.threshold = threshold;
      }
    };
    double vacuous = unknown_obj;
    for (int j = 0; j < k; ++j) vacuous += block_objective(kp[j], km[j], eps);
    consider(kNegInf, vacuous);

    std::fill(lp.begin(), lp.end(), 0.0);
    std::fill(lm.begin(), lm.end(), 0.0);
    const auto& known = ord.known;
    for (std::size_t r = 0; r < known.size(); ++r) {
      const int i = known[r];
      const double* w = &weights[static_cast<std::size_t>(i) * k];
      for (int j = 0; j < k; ++j) (j < bins[i] ? lp[j] : lm[j]) += w[j];
      if (r + 1 == known.size()) break;
      const double v = data.features[i][f];
      const double next = data.features[known[r + 1]][f];
      if (next == v) continue;
      double threshold = 0.5 * (v + next);
      if (!(threshold > v)) threshold = next;
      double obj = unknown_obj;
      for (int j = 0; j < k; ++j) {
        obj += block_objective(lp[j], lm[j], eps);
        obj += block_objective(std::max(0.0, kp[j] - lp[j]), std::max(0.0, km[j] - lm[j]), eps);
      }
      consider(threshold, obj);
    }
  }

  // Block values for the winning partition.
  Stump& s = best.stump;
  std::vector<double> ap(k, 0.0), am(k, 0.0), bpw(k, 0.0), bm(k, 0.0), cp(k, 0.0), cm(k, 0.0);
  for (int i = 0; i < m; ++i) {
    const double v = data.features[i][s.feature];
    const double* w = &weights[static_cast<std::size_t>(i) * k];
    std::vector<double>* plus;
    std::vector<double>* minus;
    if (is_unknown(v)) {
      plus = &cp;
      minus = &cm;
    } else if (v >= s.threshold) {
      plus = &ap;
      minus = &am;
    } else {
      plus = &bpw;
      minus = &bm;
    }
    for (int j = 0; j < k; ++j) (j < bins[i] ? (*plus)[j] : (*minus)[j]) += w[j];
  }
  s.a.resize(k);
  s.b.resize(k);
  s.c.resize(k);
  for (int j = 0; j < k; ++j) {
    s.a[j] = block_value(ap[j], am[j], eps);
    s.b[j] = block_value(bpw[j], bm[j], eps);
    s.c[j] = block_value(cp[j], cm[j], eps);
  }
  return best;
}

}  // namespace

void Dataset::add(std::vector<double> x, double y) {
  if (!features.empty() && x.size() != features.front().size()) throw std::invalid_argument("feature length mismatch");
  features.push_back(std::move(x));
  labels.push_back(y);
}

void Dataset::validate() const {
  if (features.size() != labels.size()) throw std::invalid_argument("one label per example");
  const std::size_t nf = num_features();
  if (!feature_names.empty() && !features.empty() && feature_names.size() != nf) {
    throw std::invalid_argument("feature names do not match feature count");
  }
  for (const auto& x : features) {
    if (x.size() != nf) throw std::invalid_argument("ragged feature rows");
  }
  for (double y : labels) {
    if (!std::isfinite(y)) throw std::invalid_argument("labels must be finite");
  }
}

Dataset read_csv(std::istream& in) {
  Dataset d;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  auto header = split_csv_line(line);
  if (header.size() < 1) throw std::invalid_argument("CSV header needs a label column");
  header.pop_back();
  d.feature_names = header;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size() + 1) {
      throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": wrong field count");
    }
    std::vector<double> x(header.size());
    for (std::size_t f = 0; f < header.size(); ++f) {
      x[f] = fields[f].empty() ? kUnknown : std::stod(fields[f]);
    }
    if (fields.back().empty()) throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": missing label");
    d.features.push_back(std::move(x));
    d.labels.push_back(std::stod(fields.back()));
  }
  d.validate();
  return d;
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data, const std::string& label_name) {
  const std::size_t nf = data.num_features();
  for (std::size_t f = 0; f < nf; ++f) {
    out << (f < data.feature_names.size() ? data.feature_names[f] : "f" + std::to_string(f)) << ',';
  }
  out << label_name << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features[i]) {
      if (!is_unknown(v)) out << v;
      out << ',';
    }
    out << data.labels[i] << '\n';
  }
}

void write_csv_file(const std::string& path, const Dataset& data, const std::string& label_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, data, label_name);
}

Breakpoints compute_breakpoints(const std::vector<double>& labels, int k) {
  if (labels.empty()) throw std::invalid_argument("no labels");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  std::map<double, int> counts;
  for (double y : labels) ++counts[y];
  std::vector<double> vals;
  std::vector<int> prefix{0};
  for (const auto& [v, c] : counts) {
    vals.push_back(v);
    prefix.push_back(prefix.back() + c);
  }
  const int d = static_cast<int>(vals.size());
  Breakpoints bp;
  if (d == 1) {
    bp.b = {vals[0], vals[0]};
    bp.degenerate = true;
    return bp;
  }
  if (d - 1 <= k) {
    bp.b = vals;
    bp.b.push_back(vals.back());
    return bp;
  }

  const int m = static_cast<int>(labels.size());
  std::vector<double> nlogn(m + 1, 0.0);
  for (int c = 1; c <= m; ++c) nlogn[c] = c * std::log(static_cast<double>(c));
  auto cost = [&](int a, int b) { return nlogn[prefix[b] - prefix[a]]; };

  // F[l][b]: best cost of covering distinct values [0, b) with l bins. The
  // cost is a convex function of interval mass, so the optimal split point
  // is monotone in b and each layer can be filled by divide and conquer.
  const int layers = k + 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> F(layers + 1, std::vector<double>(d + 1, inf));
  std::vector<std::vector<int>> arg(layers + 1, std::vector<int>(d + 1, -1));
  F[0][0] = 0.0;
  for (int l = 1; l <= layers; ++l) {
    const int lo_b = l;
    const int hi_b = d - (layers - l);
    auto solve = [&](auto&& self, int b_lo, int b_hi, int a_lo, int a_hi) -> void {
      if (b_lo > b_hi) return;
      const int mid = (b_lo + b_hi) / 2;
      double best = inf;
      int best_a = -1;
      for (int a = std::max(a_lo, l - 1); a <= std::min(a_hi, mid - 1); ++a) {
        if (F[l - 1][a] == inf) continue;
        const double val = F[l - 1][a] + cost(a, mid);
        if (val < best) {
          best = val;
          best_a = a;
        }
      }
      F[l][mid] = best;
      arg[l][mid] = best_a;
      const int split = best_a < 0 ? a_lo : best_a;
      self(self, b_lo, mid - 1, a_lo, split);
      self(self, mid + 1, b_hi, best_a < 0 ? a_lo : best_a, a_hi);
    };
    solve(solve, lo_b, hi_b, 0, d - 1);
  }
  std::vector<int> cuts;
  int b = d;
  for (int l = layers; l >= 1; --l) {
    const int a = arg[l][b];
    if (l > 1) cuts.push_back(a);
    b = a;
  }
  std::reverse(cuts.begin(), cuts.end());
  bp.b.push_back(vals[0]);
  for (int c : cuts) bp.b.push_back(vals[c]);
  bp.b.push_back(vals.back());
  return bp;
}

double bin_entropy_objective(const std::vector<double>& labels, const Breakpoints& bp) {
  std::vector<int> counts(bp.k() + 1, 0);
  for (double y : labels) ++counts[bin_of(bp, y)];
  double s = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / labels.size();
    s += q * std::log(q);
  }
  return s;
}

int bin_of(const Breakpoints& bp, double y) {
  const int k = bp.k();
  // Interior breakpoints are b[1..k].
  return static_cast<int>(std::upper_bound(bp.b.begin() + 1, bp.b.begin() + 1 + k, y) - (bp.b.begin() + 1));
}

const std::vector<double>& Stump::block(double v) const {
  if (is_unknown(v)) return c;
  return v >= threshold ? a : b;
}

StumpChoice best_stump(const std::vector<double>& weights, const Dataset& data, const std::vector<int>& bins, int k,
                       double smoothing) {
  data.validate();
  if (weights.size() != data.size() * static_cast<std::size_t>(k)) throw std::invalid_argument("weights must be m x k");
  if (bins.size() != data.size()) throw std::invalid_argument("one bin per example");
  return search(weights, data, bins, k, smoothing, sort_features(data));
}

std::vector<double> monotonize(const std::vector<double>& scores) {
  const std::size_t k = scores.size();
  std::vector<double> upper(k), lower(k), out(k);
  for (std::size_t j = k; j-- > 0;) upper[j] = j + 1 < k ? std::max(scores[j], upper[j + 1]) : scores[j];
  for (std::size_t j = 0; j < k; ++j) lower[j] = j > 0 ? std::min(scores[j], lower[j - 1]) : scores[j];
  for (std::size_t j = 0; j < k; ++j) out[j] = 0.5 * (upper[j] + lower[j]);
  return out;
}

CdeModel::CdeModel(Breakpoints bp, std::vector<Stump> stumps, int num_features)
    : bp_(std::move(bp)), stumps_(std::move(stumps)), num_features_(num_features) {
  if (bp_.b.size() < 2) throw std::invalid_argument("breakpoints need b_0 and b_{k+1}");
  for (std::size_t j = 1; j + 1 < bp_.b.size(); ++j) {
    if (!(bp_.b[j] > bp_.b[j - 1])) throw std::invalid_argument("breakpoints must increase");
  }
  if (bp_.b.back() < bp_.b[bp_.b.size() - 2]) throw std::invalid_argument("b_{k+1} below b_k");
  for (const Stump& s : stumps_) {
    if (s.feature < 0 || s.feature >= num_features_) throw std::invalid_argument("stump feature out of range");
    const std::size_t k = static_cast<std::size_t>(this->k());
    if (s.a.size() != k || s.b.size() != k || s.c.size() != k) throw std::invalid_argument("stump width != k");
  }
}

void CdeModel::check_input(const std::vector<double>& x) const {
  if (empty()) throw std::logic_error("untrained model");
  if (static_cast<int>(x.size()) != num_features_) throw std::invalid_argument("feature vector length mismatch");
}

std::vector<double> CdeModel::raw_scores(const std::vector<double>& x) const {
  check_input(x);
  std::vector<double> f(k(), 0.0);
  for (const Stump& s : stumps_) {
    const auto& h = s.block(x[s.feature]);
    for (int j = 0; j < k(); ++j) f[j] += h[j];
  }
  return f;
}

std::vector<double> CdeModel::predict_cdf(const std::vector<double>& x) const {
  const std::vector<double> f = monotonize(raw_scores(x));
  std::vector<double> p(k() + 2);
  p.front() = 1.0;
  p.back() = 0.0;
  for (int j = 0; j < k(); ++j) p[j + 1] = logistic(f[j]);
  return p;
}

double CdeModel::cdf(const std::vector<double>& x, double t) const {
  const auto p = predict_cdf(x);
  double total = 0.0;
  for (int j = 0; j <= k(); ++j) {
    const double w = p[j] - p[j + 1];
    const double lo = bp_.b[j], hi = bp_.b[j + 1];
    if (t >= hi) {
      total += w;
    } else if (t > lo) {
      total += w * (t - lo) / (hi - lo);
    } else if (t == lo && hi == lo) {
      total += w;
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

double CdeModel::sample(const std::vector<double>& x, std::mt19937_64& rng) const {
  const auto p = predict_cdf(x);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  int j = 0;
  double acc = 0.0;
  for (; j < k(); ++j) {
    acc += p[j] - p[j + 1];
    if (u < acc) break;
  }
  const double lo = bp_.b[j], hi = bp_.b[j + 1];
  return lo + unit(rng) * (hi - lo);
}

double CdeModel::expected_value(const std::vector<double>& x) const {
  const auto p = predict_cdf(x);
  double e = 0.0;
  for (int j = 0; j <= k(); ++j) e += (p[j] - p[j + 1]) * 0.5 * (bp_.b[j] + bp_.b[j + 1]);
  return e;
}

double CdeModel::expected_positive_part(const std::vector<double>& x) const {
  const auto p = predict_cdf(x);
  double e = 0.0;
  for (int j = 0; j <= k(); ++j) {
    const double w = p[j] - p[j + 1];
    const double lo = bp_.b[j], hi = bp_.b[j + 1];
    if (hi <= 0.0) continue;
    if (lo >= 0.0) {
      e += w * 0.5 * (lo + hi);
    } else {
      e += w * hi * hi / (2.0 * (hi - lo));
    }
  }
  return e;
}

std::string CdeModel::to_json() const {
  nlohmann::json j;
  j["format"] = "tac-cde";
  j["version"] = kModelVersion;
  j["num_features"] = num_features_;
  j["breakpoints"] = bp_.b;
  j["degenerate"] = bp_.degenerate;
  j["stumps"] = nlohmann::json::array();
  for (const Stump& s : stumps_) {
    nlohmann::json js;
    js["feature"] = s.feature;
    js["threshold"] = std::isfinite(s.threshold) ? nlohmann::json(s.threshold) : nlohmann::json(nullptr);
    js["A"] = s.a;
    js["B"] = s.b;
    js["C"] = s.c;
    j["stumps"].push_back(std::move(js));
  }
  return j.dump();
}

CdeModel CdeModel::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "tac-cde") throw std::invalid_argument("not a CDE model document");
  if (j.at("version").get<int>() != kModelVersion) throw std::invalid_argument("unsupported CDE model version");
  Breakpoints bp;
  bp.b = j.at("breakpoints").get<std::vector<double>>();
  bp.degenerate = j.value("degenerate", false);
  std::vector<Stump> stumps;
  for (const auto& js : j.at("stumps")) {
    Stump s;
    s.feature = js.at("feature").get<int>();
    s.threshold = js.at("threshold").is_null() ? kNegInf : js.at("threshold").get<double>();
    s.a = js.at("A").get<std::vector<double>>();
    s.b = js.at("B").get<std::vector<double>>();
    s.c = js.at("C").get<std::vector<double>>();
    stumps.push_back(std::move(s));
  }
  return CdeModel(std::move(bp), std::move(stumps), j.at("num_features").get<int>());
}

void CdeModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << '\n';
}

CdeModel CdeModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

TrainResult train(const Dataset& data, const TrainOptions& options) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
  if (options.k < 1) throw std::invalid_argument("k must be at least 1");
  if (options.rounds < 1) throw std::invalid_argument("at least one boosting round");
  const int m = static_cast<int>(data.size());
  const int nf = static_cast<int>(data.num_features());
  const double eps = options.smoothing < 0 ? 1.0 / (2.0 * m) : options.smoothing;

  TrainResult result;
  Breakpoints bp = compute_breakpoints(data.labels, options.k);
  const int k = bp.k();
  if (k == 0 || nf == 0) {
    result.model = CdeModel(std::move(bp), {}, nf);
    return result;
  }
  std::vector<int> bins(m);
  for (int i = 0; i < m; ++i) bins[i] = bin_of(bp, data.labels[i]);
  const auto orders = sort_features(data);

  std::vector<double> f(static_cast<std::size_t>(m) * k, 0.0);
  std::vector<double> w(f.size());
  std::vector<Stump> stumps;
  auto loss = [&] {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < k; ++j) {
        const double s = j < bins[i] ? 1.0 : -1.0;
        total += softplus_neg(s * f[static_cast<std::size_t>(i) * k + j]);
      }
    }
    return total;
  };
  result.loss.push_back(loss());
  for (int t = 0; t < options.rounds; ++t) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < k; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * k + j;
        const double s = j < bins[i] ? 1.0 : -1.0;
        w[idx] = logistic(-s * f[idx]);
      }
    }
    StumpChoice choice = search(w, data, bins, k, eps, orders);
    for (int i = 0; i < m; ++i) {
      const auto& h = choice.stump.block(data.features[i][choice.stump.feature]);
      for (int j = 0; j < k; ++j) f[static_cast<std::size_t>(i) * k + j] += h[j];
    }
    stumps.push_back(std::move(choice.stump));
    result.loss.push_back(loss());
  }
  result.model = CdeModel(std::move(bp), std::move(stumps), nf);
  return result;
}

double logistic_loss(const CdeModel& model, const Dataset& data) {
  double total = 0.0;
  const int k = model.k();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto f = model.raw_scores(data.features[i]);
    const int bin = bin_of(model.breakpoints(), data.labels[i]);
    for (int j = 0; j < k; ++j) total += softplus_neg((j < bin ? 1.0 : -1.0) * f[j]);
  }
  return total;
}

}  // namespace tac::cde
