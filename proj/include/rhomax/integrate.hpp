#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace rhomax {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;      // accumulated error estimate
  std::size_t evals = 0;   // integrand evaluations
};

namespace detail {

// Gauss-Kronrod 7/15 pair on [-1, 1]; positive abscissae, centre last.
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};

inline constexpr double gk_kw[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// Gauss-7 weights, matching gk_nodes indices 1, 3, 5 and the centre.
inline constexpr double gk_gw[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
inline std::pair<double, double> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = gk_kw[7] * fc;
  double g = gk_gw[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double fp = f(c + h * gk_nodes[i]);
    const double fm = f(c - h * gk_nodes[i]);
    k += gk_kw[i] * (fp + fm);
    if (i % 2 == 1) g += gk_gw[i / 2] * (fp + fm);
  }
  k *= h;
  g *= h;
  return {k, std::fabs(k - g)};
}

} // namespace detail

// Adaptive quadrature of f over [a, b] to absolute tolerance tol.
// Bisects intervals whose Kronrod-Gauss discrepancy exceeds the local
// budget (halved per split, so leaf estimates sum to <= tol).  Never
// throws: the caller inspects .error when tolerance matters.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol = 1e-10,
                     int max_depth = 48) {
  QuadResult out;
  if (!(a < b)) return out;

  struct Seg {
    double a, b, tol;
    int depth;
  };
  std::vector<Seg> stack;
  stack.push_back({a, b, tol, 0});
  while (!stack.empty()) {
    const Seg s = stack.back();
    stack.pop_back();
    const auto [v, e] = detail::gk15(f, s.a, s.b);
    out.evals += 15;
    if (e <= s.tol || s.depth >= max_depth) {
      out.value += v;
      out.error += e;
    } else {
      const double m = 0.5 * (s.a + s.b);
      stack.push_back({s.a, m, 0.5 * s.tol, s.depth + 1});
      stack.push_back({m, s.b, 0.5 * s.tol, s.depth + 1});
    }
  }
  return out;
}

// Integrate over [breaks[0], breaks.back()] splitting at every interior
// breakpoint, sharing tol across the pieces.  Use at known kinks or jumps
// of the integrand so the adaptive pass only ever sees smooth pieces.
template <class F>
QuadResult integrate_pieces(F&& f, const std::vector<double>& breaks,
                            double tol = 1e-10) {
  QuadResult out;
  if (breaks.size() < 2) return out;
  const double piece_tol = tol / static_cast<double>(breaks.size() - 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const QuadResult r = integrate(f, breaks[i], breaks[i + 1], piece_tol);
    out.value += r.value;
    out.error += r.error;
    out.evals += r.evals;
  }
  return out;
}

} // namespace rhomax
