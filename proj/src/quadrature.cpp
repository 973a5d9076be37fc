#include "qsel/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <memory>

#include "qsel/error.hpp"

namespace qsel {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "Gauss rule needs at least one node");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
      table(gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
  if (!table) throw Error(ErrorKind::QuadratureFail, "glfixed table allocation failed");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(a, b, i, &x, &w, table.get());
    rule.nodes(i) = x;
    rule.weights(i) = w;
  }
  return rule;
}

}  // namespace qsel
