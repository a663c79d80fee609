#include "mfpt/simulate.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace mfpt {

PathState forward_step(const PathState& state, const Mat& M, const Vec& Q) {
  PathState next;
  next.n = state.n + 1;
  next.V = M * state.V + Q;
  Vec img = M * state.direction;
  double nm = img.sum();
  if (nm <= 0.0) throw DomainError("forward_step: degenerate action");
  next.direction = img / nm;
  next.pi_log_norm = state.pi_log_norm + std::log(nm);
  return next;
}

namespace {

// Perpetuity accumulator with the matrix product kept in scaled form.
struct Perpetuity {
  Vec v;
  Mat pi_hat;
  double log_scale = 0.0;

  explicit Perpetuity(int d) : v(Vec::Zero(d)), pi_hat(Mat::Identity(d, d)) {}

  void step(const Atom& a) {
    v += std::exp(log_scale) * (pi_hat * a.Q);
    pi_hat = pi_hat * a.M;
    double nm = op_norm(pi_hat);
    if (nm > 0.0 && (nm > 1e120 || nm < 1e-120)) {
      log_scale += std::log(nm);
      pi_hat /= nm;
    }
  }
};

PassageSample finish(const Perpetuity& p, double u, const Vec* y,
                     long long n, bool passed) {
  PassageSample out;
  double nv = p.v.sum();
  out.direction = nv > 0.0 ? Vec(p.v / nv) : p.v;
  if (passed) {
    out.tau = n;
    out.overshoot = (y ? y->dot(p.v) : nv) - u;
  }
  return out;
}

}  // namespace

PassageSample simulate_tau(const Law& law, double u, long long max_steps,
                           std::uint64_t seed, std::uint64_t stream,
                           const Vec* y) {
  if (u <= 0.0 || max_steps < 1)
    throw DomainError("simulate_tau: need u > 0 and max_steps >= 1");
  StreamRng rng(seed, stream);
  Perpetuity p(law.d());
  for (long long n = 1; n <= max_steps; ++n) {
    p.step(law.sample(rng));
    double level = y ? y->dot(p.v) : p.v.sum();
    if (level > u) {
      PassageSample out = finish(p, u, y, n, true);
      out.seed = seed;
      out.stream = stream;
      return out;
    }
  }
  PassageSample out = finish(p, u, y, max_steps, false);
  out.seed = seed;
  out.stream = stream;
  return out;
}

PassageSample simulate_tau_tilted(const Law& law, double u, double s,
                                  const SpectralSolution& spectral,
                                  long long max_steps, std::uint64_t seed,
                                  std::uint64_t stream, const Vec* y) {
  if (u <= 0.0 || max_steps < 1)
    throw DomainError("simulate_tau_tilted: need u > 0 and max_steps >= 1");
  const auto& atoms = law.atoms();
  StreamRng rng(seed, stream);
  Perpetuity p(law.d());
  Vec x = Vec::Constant(law.d(), 1.0 / law.d());  // tilt chain direction
  double log_weight = 0.0;
  std::vector<double> cum(atoms.size());
  std::vector<double> logf(atoms.size());
  for (long long n = 1; n <= max_steps; ++n) {
    // Tilted atom probabilities at the current direction.
    double total = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      Vec img = atoms[k].M * x;
      double nm = img.sum();
      if (nm <= 0.0)
        throw DomainError("simulate_tau_tilted: degenerate action");
      double f = atoms[k].p * std::pow(nm, s) * spectral.r_at(img / nm);
      logf[k] = std::log(f);
      total += f;
      cum[k] = total;
    }
    for (auto& c : cum) c /= total;
    cum.back() = 1.0;
    std::size_t k = rng.categorical(cum);
    // log(p_k) - log(q_k) with q_k the actual sampling probability.
    log_weight += std::log(atoms[k].p) - (logf[k] - std::log(total));
    p.step(atoms[k]);
    x = project(atoms[k].M, x);
    double level = y ? y->dot(p.v) : p.v.sum();
    if (level > u) {
      PassageSample out = finish(p, u, y, n, true);
      out.log_weight = log_weight;
      out.seed = seed;
      out.stream = stream;
      return out;
    }
  }
  PassageSample out = finish(p, u, y, max_steps, false);
  out.log_weight = log_weight;
  out.seed = seed;
  out.stream = stream;
  return out;
}

std::vector<Vec> sample_V(const Law& law, int n, int samples,
                          std::uint64_t seed, int workers) {
  std::vector<Vec> out(static_cast<std::size_t>(samples));
  parallel_for(samples, workers, [&](long long rep) {
    StreamRng rng(seed, static_cast<std::uint64_t>(rep));
    Vec v = Vec::Zero(law.d());
    for (int k = 0; k < n; ++k) {
      const Atom& a = law.sample(rng);
      v = a.M * v + a.Q;
    }
    out[static_cast<std::size_t>(rep)] = std::move(v);
  });
  return out;
}

long long default_max_steps(double u, double rho) {
  return static_cast<long long>(std::ceil(4.0 * rho * std::log(u))) + 1;
}

void parallel_for(long long count, int workers,
                  const std::function<void(long long)>& fn) {
  if (workers <= 1 || count < 2) {
    for (long long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long long> cursor{0};
  auto worker = [&] {
    const long long chunk = 256;
    for (;;) {
      long long start = cursor.fetch_add(chunk);
      if (start >= count) return;
      long long end = std::min(count, start + chunk);
      for (long long i = start; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace mfpt
