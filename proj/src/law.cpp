#include "mfpt/law.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mfpt {

using nlohmann::ordered_json;

double dominant_eigenvalue(const Mat& m, int max_iter, double tol) {
  const Eigen::Index d = m.rows();
  if (d == 1) return m(0, 0);
  Vec v = Vec::Constant(d, 1.0 / static_cast<double>(d));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = m * v;
    double n = w.sum();
    if (n <= 0.0) return 0.0;
    w /= n;
    if (it > 0 && std::abs(n - lambda) <= tol * std::max(1.0, std::abs(n))) {
      lambda = n;
      break;
    }
    lambda = n;
    v = w;
  }
  return lambda;
}

Law::Law(int d, std::vector<Atom> atoms, std::string name)
    : d_(d), name_(std::move(name)), atoms_(std::move(atoms)) {
  if (d_ <= 0) throw DomainError("Law: dimension must be positive");
  if (atoms_.empty()) throw DomainError("Law: empty support");
  double mass = 0.0;
  for (const auto& a : atoms_) {
    if (a.M.rows() != d_ || a.M.cols() != d_ || a.Q.size() != d_)
      throw DomainError("Law: atom shape mismatch");
    if ((a.M.array() < 0.0).any() || (a.Q.array() < 0.0).any())
      throw DomainError("Law: negative entry in atom");
    if (a.p <= 0.0) throw DomainError("Law: atom probability must be > 0");
    mass += a.p;
  }
  if (std::abs(mass - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "Law: probability mass " << mass << " != 1";
    throw DomainError(os.str());
  }
  cumulative_.reserve(atoms_.size());
  double acc = 0.0;
  for (const auto& a : atoms_) {
    acc += a.p;
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
}

std::string Law::to_json() const {
  ordered_json j;
  j["d"] = d_;
  j["kind"] = "atoms";
  j["name"] = name_;
  j["atoms"] = ordered_json::array();
  for (const auto& a : atoms_) {
    ordered_json ja;
    ja["M"] = ordered_json::array();
    for (Eigen::Index i = 0; i < d_; ++i) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index k = 0; k < d_; ++k) row.push_back(a.M(i, k));
      ja["M"].push_back(row);
    }
    ja["Q"] = ordered_json::array();
    for (Eigen::Index i = 0; i < d_; ++i) ja["Q"].push_back(a.Q[i]);
    ja["p"] = a.p;
    j["atoms"].push_back(ja);
  }
  return j.dump();
}

std::uint64_t Law::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : to_json()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Law Law::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  const int d = j.at("d").get<int>();
  const std::string kind = j.value("kind", "atoms");
  const std::string name = j.value("name", "unnamed");
  if (kind == "garch12") {
    const auto& g = j.at("garch12");
    std::vector<std::pair<double, double>> z2;
    for (const auto& a : g.at("z2_atoms"))
      z2.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    return build_law_garch12(g.at("a0").get<double>(), g.at("a1").get<double>(),
                             g.at("b1").get<double>(), g.at("b2").get<double>(),
                             z2);
  }
  if (kind == "scalar_atoms") {
    std::vector<std::array<double, 3>> atoms;
    for (const auto& a : j.at("atoms"))
      atoms.push_back({a.at("m").get<double>(), a.at("q").get<double>(),
                       a.at("p").get<double>()});
    return build_law_scalar(atoms, name);
  }
  std::vector<Atom> atoms;
  for (const auto& ja : j.at("atoms")) {
    Atom a;
    a.M = Mat(d, d);
    a.Q = Vec(d);
    const auto& m = ja.at("M");
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) a.M(i, k) = m.at(i).at(k).get<double>();
    for (int i = 0; i < d; ++i) a.Q[i] = ja.at("Q").at(i).get<double>();
    a.p = ja.at("p").get<double>();
    atoms.push_back(std::move(a));
  }
  return Law(d, std::move(atoms), name);
}

Law Law::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("Law::load: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

Law build_law_garch12(double a0, double a1, double b1, double b2,
                      const std::vector<std::pair<double, double>>& z2_atoms,
                      bool* stationarity_warning) {
  if (a0 <= 0.0 || a1 <= 0.0 || b1 <= 0.0 || b2 <= 0.0)
    throw DomainError("build_law_garch12: coefficients must be positive");
  if (stationarity_warning) *stationarity_warning = (a1 + b1 + b2 >= 1.0);
  std::vector<Atom> atoms;
  for (auto [z2, p] : z2_atoms) {
    if (z2 < 0.0) throw DomainError("build_law_garch12: negative Z^2 atom");
    Atom a;
    a.M = Mat(2, 2);
    a.M << b1 + a1 * z2, b2, 1.0, 0.0;
    a.Q = Vec(2);
    a.Q << a0, 0.0;
    a.p = p;
    atoms.push_back(std::move(a));
  }
  return Law(2, std::move(atoms), "garch12");
}

Law build_law_scalar(const std::vector<std::array<double, 3>>& triples,
                     std::string name) {
  std::vector<Atom> atoms;
  for (const auto& t : triples) {
    Atom a;
    a.M = Mat::Constant(1, 1, t[0]);
    a.Q = Vec::Constant(1, t[1]);
    a.p = t[2];
    atoms.push_back(std::move(a));
  }
  return Law(1, std::move(atoms), std::move(name));
}

Law law_golden() {
  return build_law_scalar({{{2.0, 1.0, 0.5}}, {{0.25, 1.0, 0.5}}}, "golden");
}

Law law_nonarith() {
  // Multipliers with incommensurable logs; the mix is tuned so that the
  // alpha-tilted log-step distribution has small skewness (the finite-u
  // error of the conditioned CLT) while the importance weights at the tilt
  // stay concentrated. alpha ~ 0.993, rho ~ 4.33.
  return build_law_scalar({{{2.38, 1.0, 0.23}}, {{0.59, 1.0, 0.77}}},
                          "nonarith");
}

Law law_garch_bundled() {
  return build_law_garch12(1.0, 0.6, 0.2, 0.15, {{0.0, 0.5}, {2.0, 0.5}});
}

Law law_flat2() {
  Atom a;
  a.M = Mat(2, 2);
  a.M << 1.0, 1.0, 1.0, 1.0;
  a.Q = Vec(2);
  a.Q << 1.0, 0.0;
  a.p = 1.0;
  return Law(2, {a}, "flat2");
}

Law law_two_d2() {
  Atom a, b;
  a.M = Mat(2, 2);
  a.M << 1.6, 0.4, 0.5, 0.3;
  a.Q = Vec(2);
  a.Q << 1.0, 0.5;
  a.p = 0.5;
  b.M = Mat(2, 2);
  b.M << 0.2, 0.3, 0.4, 0.1;
  b.Q = Vec(2);
  b.Q << 0.5, 1.0;
  b.p = 0.5;
  return Law(2, {a, b}, "two_d2");
}

namespace {

// Smallest-denominator rational approximation check: returns true when
// x is within tol of p/q with q <= qmax.
bool looks_rational(double x, int qmax, double tol) {
  for (int q = 1; q <= qmax; ++q) {
    double p = std::round(x * q);
    if (std::abs(x - p / q) <= tol) return true;
  }
  return false;
}

}  // namespace

ConditionReport check_conditions(const Law& law, int max_product_len) {
  ConditionReport rep;
  const auto& atoms = law.atoms();

  rep.allowable = true;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!is_allowable(atoms[i].M)) {
      rep.allowable = false;
      rep.non_allowable_atom = static_cast<int>(i);
      break;
    }
  }

  // A4 constant over the support atoms: max over columns of max/min entry.
  double c = 1.0;
  bool c_finite = true;
  for (const auto& a : atoms) {
    for (Eigen::Index j = 0; j < law.d(); ++j) {
      double mx = a.M.col(j).maxCoeff();
      double mn = a.M.col(j).minCoeff();
      if (mn <= 0.0) { c_finite = false; break; }
      c = std::max(c, mx / mn);
    }
    if (!c_finite) break;
  }
  if (c_finite) rep.column_ratio_c = c;

  // Breadth-first search over products of atoms for strict positivity, and
  // collection of log dominant eigenvalues of positive products for the
  // non-arithmeticity evidence.
  std::vector<Mat> frontier;
  for (const auto& a : atoms) frontier.push_back(a.M);
  const std::size_t product_cap = 4096;
  for (int len = 1; len <= max_product_len; ++len) {
    for (const auto& m : frontier) {
      if (is_strictly_positive(m)) {
        if (!rep.has_positive_product) {
          rep.has_positive_product = true;
          rep.witness_length = len;
        }
        if (rep.log_lambdas.size() < 64) {
          double lam = dominant_eigenvalue(m);
          if (lam > 0.0) rep.log_lambdas.push_back(std::log(lam));
        }
      }
    }
    if (len == max_product_len) break;
    std::vector<Mat> next;
    for (const auto& m : frontier) {
      for (const auto& a : atoms) {
        if (next.size() >= product_cap) break;
        next.push_back(m * a.M);
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }

  // Heuristic A3 check: pairwise ratios of log eigenvalues that all admit a
  // small-denominator rational approximation indicate an arithmetic law.
  if (rep.log_lambdas.size() >= 2) {
    bool all_rational = true;
    double base = 0.0;
    for (double v : rep.log_lambdas)
      if (std::abs(v) > std::abs(base)) base = v;
    for (double v : rep.log_lambdas) {
      if (v == base || std::abs(base) < 1e-12) continue;
      if (!looks_rational(v / base, 64, 1e-9)) all_rational = false;
    }
    rep.nonarith_pass = !all_rational;
    rep.nonarith_note = all_rational
        ? "all log-eigenvalue ratios are small-denominator rationals; "
          "law appears arithmetic"
        : "found incommensurable log-eigenvalue pair";
  } else {
    rep.nonarith_pass = false;
    rep.nonarith_note = rep.log_lambdas.size() == 1
        ? "single positive product; generated group is a lattice"
        : "no strictly positive product within the search horizon";
  }

  rep.moment_note = "finite support: E||M||^s finite for all s >= 0";
  return rep;
}

}  // namespace mfpt
