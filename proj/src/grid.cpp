#include "mfpt/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mfpt/rng.hpp"

namespace mfpt {

SimplexGrid SimplexGrid::make(int d, int resolution, std::uint64_t seed) {
  SimplexGrid g;
  g.d = d;
  g.resolution = std::max(1, resolution);
  if (d == 1) {
    g.resolution = 1;
    g.points.push_back(Vec::Constant(1, 1.0));
    g.weights.push_back(1.0);
    return g;
  }
  if (d == 2) {
    const int m = g.resolution;
    for (int i = 0; i < m; ++i) {
      double t = (i + 0.5) / m;
      Vec p(2);
      p << t, 1.0 - t;
      g.points.push_back(p);
      g.weights.push_back(1.0 / m);
    }
    return g;
  }
  if (d == 3) {
    const int m = g.resolution;
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j + i <= m; ++j) {
        Vec p(3);
        p << static_cast<double>(i) / m, static_cast<double>(j) / m,
            static_cast<double>(m - i - j) / m;
        g.points.push_back(p);
      }
    g.weights.assign(g.points.size(), 1.0 / static_cast<double>(g.points.size()));
    return g;
  }
  // d > 3: Dirichlet(1,...,1) nodes, equal weights.
  StreamRng rng(seed, 99);
  const int n = g.resolution;
  for (int k = 0; k < n; ++k) {
    Vec p(d);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      double e = -std::log(1.0 - rng.uniform());
      p[i] = e;
      s += e;
    }
    g.points.push_back(p / s);
  }
  g.weights.assign(g.points.size(), 1.0 / static_cast<double>(n));
  return g;
}

SimplexGrid SimplexGrid::coarsened() const {
  return make(d, std::max(1, resolution / 2));
}

std::vector<std::pair<int, double>> SimplexGrid::stencil(const Vec& x) const {
  if (d == 1) return {{0, 1.0}};
  if (d == 2) {
    // Linear interpolation in the first coordinate over the midpoint grid.
    const int m = resolution;
    double t = std::clamp(x[0], 0.0, 1.0);
    double pos = t * m - 0.5;
    if (pos <= 0.0) return {{0, 1.0}};
    if (pos >= m - 1) return {{m - 1, 1.0}};
    int i = static_cast<int>(pos);
    double frac = pos - i;
    return {{i, 1.0 - frac}, {i + 1, frac}};
  }
  // d >= 3: inverse-distance (Shepard) weights over the d+1 nearest nodes.
  const std::size_t k = static_cast<std::size_t>(d) + 1;
  std::vector<std::pair<double, int>> dist;
  dist.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    dist.emplace_back((points[i] - x).cwiseAbs().sum(), static_cast<int>(i));
  std::partial_sort(dist.begin(), dist.begin() + std::min(k, dist.size()),
                    dist.end());
  if (dist.front().first < 1e-14) return {{dist.front().second, 1.0}};
  std::vector<std::pair<int, double>> out;
  double total = 0.0;
  for (std::size_t j = 0; j < std::min(k, dist.size()); ++j) {
    double w = 1.0 / dist[j].first;
    out.emplace_back(dist[j].second, w);
    total += w;
  }
  for (auto& [i, w] : out) w /= total;
  return out;
}

}  // namespace mfpt
