#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfpt/rng.hpp"
#include "mfpt/types.hpp"

namespace mfpt {

// One joint atom of the (M, Q) law. M and Q may be dependent: the pair is
// drawn as a unit.
struct Atom {
  Mat M;
  Vec Q;
  double p = 0.0;
};

// Finite-support law of the i.i.d. pairs (M_n, Q_n). All spectral and
// oracle paths require the atom list; continuous laws are out of scope here.
class Law {
 public:
  Law() = default;
  Law(int d, std::vector<Atom> atoms, std::string name);

  int d() const { return d_; }
  const std::string& name() const { return name_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  const Atom& sample(StreamRng& rng) const {
    return atoms_[rng.categorical(cumulative_)];
  }
  std::size_t sample_index(StreamRng& rng) const {
    return rng.categorical(cumulative_);
  }

  // FNV-1a over the canonical JSON form; stable across runs.
  std::uint64_t hash() const;

  std::string to_json() const;
  static Law from_json(const std::string& text);
  static Law load(const std::string& path);

 private:
  int d_ = 0;
  std::string name_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

// d = 2 law of the squared-volatility recursion of a GARCH(1,2) process:
// M = [[b1 + a1 Z^2, b2], [1, 0]], Q = (a0, 0), with Z^2 ranging over the
// given (value, probability) atoms. Throws on nonpositive coefficients;
// a1 + b1 + b2 >= 1 only triggers the returned warning flag.
Law build_law_garch12(double a0, double a1, double b1, double b2,
                      const std::vector<std::pair<double, double>>& z2_atoms,
                      bool* stationarity_warning = nullptr);

// d = 1 convenience constructor from (m, q, p) triples.
Law build_law_scalar(const std::vector<std::array<double, 3>>& atoms,
                     std::string name = "scalar");

// Bundled test laws.
Law law_golden();     // {(2,1,1/2),(1/4,1,1/2)}: alpha = log2 golden ratio
Law law_nonarith();   // {(2,1,1/2),(1/e,1,1/2)}: non-arithmetic log spectrum
Law law_garch_bundled();
Law law_flat2();      // d=2 single atom [[1,1],[1,1]], Q=(1,0)
Law law_two_d2();     // d=2 two-atom law used by oracle cross-checks

// Result of checking conditions A1-A4 on a finite-support law.
struct ConditionReport {
  bool allowable = false;
  int non_allowable_atom = -1;
  bool has_positive_product = false;
  int witness_length = 0;
  std::optional<double> column_ratio_c;  // A4 constant over the atoms
  // log of dominant eigenvalues of strictly positive products found.
  std::vector<double> log_lambdas;
  bool nonarith_pass = false;  // heuristic evidence only, never a proof
  std::string nonarith_note;
  std::string moment_note;
  bool heuristic_only = false;
};

ConditionReport check_conditions(const Law& law, int max_product_len);

}  // namespace mfpt
