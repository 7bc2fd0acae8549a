#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <variant>

#include "hyperend/core/error.hpp"

namespace hyperend::geom {

enum class ModelKind { H2_cone, H3_cone, dS3_cone };

struct ModelConeMetric {
  ModelKind kind;
  double angle;  // total angle around the singular locus
};

// Component matrix of a model metric.  Coordinates are (r, alpha) for H2_cone,
// (rho, r, alpha) for H3_cone and (t, phi, alpha) for dS3_cone.
inline Eigen::MatrixXd model_metric_eval(const ModelConeMetric& m, const Eigen::VectorXd& x) {
  if (!(m.angle > 0.0)) {
    throw Error(ErrorKind::out_of_domain, "geom_core", "cone angle must be positive");
  }
  switch (m.kind) {
    case ModelKind::H2_cone: {
      if (x.size() != 2) throw Error(ErrorKind::out_of_domain, "geom_core", "H2_cone expects (r, alpha)");
      if (!(x[0] > 0.0)) throw Error(ErrorKind::out_of_domain, "geom_core", "r must be positive");
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
      g(0, 0) = 1.0;
      g(1, 1) = std::sinh(x[0]) * std::sinh(x[0]);
      return g;
    }
    case ModelKind::H3_cone: {
      if (x.size() != 3) throw Error(ErrorKind::out_of_domain, "geom_core", "H3_cone expects (rho, r, alpha)");
      if (!(x[1] > 0.0)) throw Error(ErrorKind::out_of_domain, "geom_core", "r must be positive");
      const double c2 = std::cosh(x[0]) * std::cosh(x[0]);
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
      g(0, 0) = 1.0;
      g(1, 1) = c2;
      g(2, 2) = c2 * std::sinh(x[1]) * std::sinh(x[1]);
      return g;
    }
    case ModelKind::dS3_cone: {
      if (x.size() != 3) throw Error(ErrorKind::out_of_domain, "geom_core", "dS3_cone expects (t, phi, alpha)");
      if (!(x[1] > 0.0) || !(x[1] < M_PI)) {
        throw Error(ErrorKind::out_of_domain, "geom_core", "phi must lie in (0, pi)");
      }
      const double c2 = std::cosh(x[0]) * std::cosh(x[0]);
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
      g(0, 0) = -1.0;
      g(1, 1) = c2;
      g(2, 2) = c2 * std::sin(x[1]) * std::sin(x[1]);
      return g;
    }
  }
  throw Error(ErrorKind::out_of_domain, "geom_core", "unknown model");
}

}  // namespace hyperend::geom
