#include "dafo/mms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dafo/integrate.hpp"

namespace dafo {

namespace {

constexpr double kPi = 3.14159265358979323846;

// G^{-1}(v) = s(|v|) v with the rationalized, cancellation-free form
// s(m) = 2 / (alpha + sqrt(alpha^2 + 4 beta m)).
double s_factor(double m, double alpha, double beta) {
  return 2.0 / (alpha + std::sqrt(alpha * alpha + 4.0 * beta * m));
}

double s_factor_deriv(double m, double alpha, double beta) {
  const double d = std::sqrt(alpha * alpha + 4.0 * beta * m);
  const double ad = alpha + d;
  return -4.0 * beta / (d * ad * ad);
}

}  // namespace

double ManufacturedCase::pressure(const Vec2& x) const {
  return 1.0 + 0.3 * std::sin(kPi * x.x()) * std::sin(kPi * x.y()) +
         0.2 * x.x();
}

Vec2 ManufacturedCase::grad_pressure(const Vec2& x) const {
  return {0.3 * kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()) + 0.2,
          0.3 * kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y())};
}

Mat2 ManufacturedCase::hess_pressure(const Vec2& x) const {
  const double ss = std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  const double cc = std::cos(kPi * x.x()) * std::cos(kPi * x.y());
  Mat2 h;
  const double a = 0.3 * kPi * kPi;
  h << -a * ss, a * cc, a * cc, -a * ss;
  return h;
}

Vec2 ManufacturedCase::exact_flux(const Vec2& x) const {
  const Vec2 v = grad_pressure(x);
  return -s_factor(v.norm(), alpha, beta) * v;
}

double ManufacturedCase::source(const Vec2& x) const {
  // f* = R(p*) + div u* with
  // div u* = -[s(|v|) tr H + s'(|v|) (v^T H v) / |v|], v = grad p*.
  const Vec2 v = grad_pressure(x);
  const Mat2 h = hess_pressure(x);
  const double m = v.norm();
  double div_u = -s_factor(m, alpha, beta) * h.trace();
  if (m > 1e-14)
    div_u -= s_factor_deriv(m, alpha, beta) * v.dot(h * v) / m;
  return r_eval(pressure(x), porosity, gamma, dt) + div_u;
}

Coefficients ManufacturedCase::coefficients(int num_elements) const {
  return Coefficients::constant(num_elements, alpha, beta, gamma, porosity,
                                dt);
}

std::vector<double> MmsTable::orders(double MmsRow::*column) const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    out.push_back(std::log2(rows[i].*column / rows[i + 1].*column));
  return out;
}

double MmsTable::fitted_order(double MmsRow::*column) const {
  // slope of log E vs log h over all levels
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& row : rows) {
    const double lh = std::log(1.0 / row.n);
    const double le = std::log(row.*column);
    sx += lh;
    sy += le;
    sxx += lh * lh;
    sxy += lh * le;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string MmsTable::to_text() const {
  const auto op = orders(&MmsRow::err_p);
  const auto opp = orders(&MmsRow::err_p_proj);
  const auto ou = orders(&MmsRow::err_u);
  auto order_str = [](const std::vector<double>& o, std::size_t i) {
    if (i == 0) return std::string("  --");
    char buf[16];
    std::snprintf(buf, sizeof buf, "%4.2f", o[i - 1]);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "   n      err_p  ord    err_p_proj  ord      err_u  ord"
        "   max_edge_flux_err  its\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char buf[180];
    std::snprintf(buf, sizeof buf,
                  "%4d  %9.3e %s   %11.3e %s  %9.3e %s  %17.3e  %3d\n",
                  rows[i].n, rows[i].err_p, order_str(op, i).c_str(),
                  rows[i].err_p_proj, order_str(opp, i).c_str(), rows[i].err_u,
                  order_str(ou, i).c_str(), rows[i].err_flux_max,
                  rows[i].newton_iterations);
    os << buf;
  }
  char tail[120];
  std::snprintf(tail, sizeof tail,
                "fitted orders: p %.2f, p_proj %.2f, u %.2f\n",
                fitted_order(&MmsRow::err_p), fitted_order(&MmsRow::err_p_proj),
                fitted_order(&MmsRow::err_u));
  os << tail;
  return os.str();
}

std::string MmsTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "n,err_p,err_p_proj,err_u,max_edge_flux_err,newton_iterations\n";
  for (const auto& row : rows)
    os << row.n << "," << row.err_p << "," << row.err_p_proj << ","
       << row.err_u << "," << row.err_flux_max << ","
       << row.newton_iterations << "\n";
  return os.str();
}

MmsTable mms_study(int levels, const ManufacturedCase& mc, Variant variant,
                   const SolverOptions& opts, int base_n) {
  MmsTable table;
  int n = base_n;
  for (int level = 0; level < levels; ++level, n *= 2) {
    const Mesh mesh = Mesh::structured(n);
    const QuadratureRule& rule = quad_points(5);
    std::vector<double> f_int = element_integrals(
        mesh, rule, [&](const Vec2& x) { return mc.source(x); });
    std::vector<double> g_mean = dirichlet_edge_means(
        mesh, [&](const Vec2& x) { return mc.pressure(x); });
    Problem problem(mesh, mc.coefficients(mesh.num_triangles()),
                    std::move(f_int), std::move(g_mean));

    HybridState state = problem.initial_state(variant);
    const SolveReport report = newton_solve(problem, variant, state, opts);

    MmsRow row;
    row.n = n;
    row.newton_iterations = report.iterations;
    row.element_balance = max_element_balance(problem, state);
    row.global_balance = global_balance(problem, state);

    const std::vector<double> p_mean = element_means(
        mesh, rule, [&](const Vec2& x) { return mc.pressure(x); });
    double e2 = 0.0, ep2 = 0.0, eu2 = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
      ep2 += mesh.tri_area[k] * (state.p[k] - p_mean[k]) *
             (state.p[k] - p_mean[k]);
      const LocalElement& elem = problem.element(k);
      elem.for_each_quad_point(
          [&](const Vec2& x, double w, const std::array<Vec2, 3>& w_out) {
            const double dp = state.p[k] - mc.pressure(x);
            e2 += w * dp * dp;
            const Vec2 uh = state.flux[k][0] * w_out[0] +
                            state.flux[k][1] * w_out[1] +
                            state.flux[k][2] * w_out[2];
            eu2 += w * (uh - mc.exact_flux(x)).squaredNorm();
          });
    }
    row.err_p = std::sqrt(e2);
    row.err_p_proj = std::sqrt(ep2);
    row.err_u = std::sqrt(eu2);

    const FieldOutput fields = recover_fields(problem, state);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const double exact = edge_mean(mesh, e, [&](const Vec2& x) {
        return mc.exact_flux(x).dot(mesh.edge_normal[e]);
      });
      row.err_flux_max =
          std::max(row.err_flux_max,
                   std::abs(fields.edge_flux[e] / mesh.edge_length(e) - exact));
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace dafo
