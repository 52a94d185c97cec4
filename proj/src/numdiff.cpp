#include "rkwave/numdiff.hpp"

#include <cmath>

namespace rkwave {

Mat jacobian_central(const FieldFn& f, const Vec& x, double h) {
  if (h <= 0.0) throw ContractError("jacobian_central: step must be positive");
  const int p = static_cast<int>(x.size());
  Mat jac;
  for (int i = 0; i < p; ++i) {
    const double hi = h * (1.0 + std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += hi;
    xm[i] -= hi;
    const Vec fp = f(xp);
    const Vec fm = f(xm);
    if (jac.size() == 0) jac.resize(fp.size(), p);
    jac.col(i) = (fp - fm) / (2.0 * hi);
  }
  return jac;
}

}  // namespace rkwave
