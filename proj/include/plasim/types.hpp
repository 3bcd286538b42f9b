#ifndef PLASIM_TYPES_HPP
#define PLASIM_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace plasim {

using Vec3 = Eigen::Vector3d;
using Index = std::int64_t;

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

} // namespace plasim

#endif
