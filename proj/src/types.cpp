#include "rkwave/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rkwave {

std::size_t GridSpec::flat(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    f = f * static_cast<std::size_t>(axes[a].n) + static_cast<std::size_t>(idx[a]);
  }
  return f;
}

std::vector<int> GridSpec::unflatten(std::size_t flat_idx) const {
  std::vector<int> idx(axes.size(), 0);
  for (std::size_t a = axes.size(); a-- > 0;) {
    idx[a] = static_cast<int>(flat_idx % static_cast<std::size_t>(axes[a].n));
    flat_idx /= static_cast<std::size_t>(axes[a].n);
  }
  return idx;
}

Vec GridSpec::node_coords(const std::vector<int>& idx) const {
  Vec r(dim());
  for (int a = 0; a < dim(); ++a) r[a] = axes[a].node(idx[a]);
  return r;
}

bool GridSpec::contains(const Vec& r, double tol_rel) const {
  if (r.size() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    const double span = std::max(1.0, axes[a].hi - axes[a].lo);
    const double tol = tol_rel * span;
    if (r[a] < axes[a].lo - tol || r[a] > axes[a].hi + tol) return false;
  }
  return true;
}

Vec GridSpec::clamp(const Vec& r) const {
  Vec out = r;
  for (int a = 0; a < dim(); ++a) {
    out[a] = std::min(axes[a].hi, std::max(axes[a].lo, out[a]));
  }
  return out;
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec g;
  std::stringstream ss(text);
  std::string axis;
  while (std::getline(ss, axis, ',')) {
    AxisSpec a;
    int consumed = 0;
    if (std::sscanf(axis.c_str(), "%lf:%lf:%d%n", &a.lo, &a.hi, &a.n, &consumed) != 3 ||
        consumed != static_cast<int>(axis.size())) {
      throw ContractError("bad grid axis '" + axis + "', expected lo:hi:n");
    }
    if (a.n < 1 || a.hi < a.lo) {
      throw ContractError("bad grid axis '" + axis + "': need n >= 1 and hi >= lo");
    }
    if (a.n == 1 && a.hi != a.lo) {
      throw ContractError("bad grid axis '" + axis + "': single-node axis needs lo == hi");
    }
    g.axes.push_back(a);
  }
  if (g.axes.empty()) throw ContractError("empty grid spec '" + text + "'");
  return g;
}

std::string GridSpec::to_string() const {
  std::string out;
  char buf[96];
  for (std::size_t a = 0; a < axes.size(); ++a) {
    std::snprintf(buf, sizeof(buf), "%.17g:%.17g:%d", axes[a].lo, axes[a].hi, axes[a].n);
    if (a) out += ',';
    out += buf;
  }
  return out;
}

}  // namespace rkwave
