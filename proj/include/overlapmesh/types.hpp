#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>

namespace olm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Index = std::int64_t;

/// Four vertex coordinates of a tetrahedron.
using TetPoints = std::array<Vec3, 4>;
/// Three vertex coordinates of a triangle.
using TriPoints = std::array<Vec3, 3>;

/// Relative tolerance for coplanarity, vertex welding and degeneracy flags.
/// Applied to lengths after scaling by the diameter of the objects involved.
inline constexpr double eps_geom = 1e-10;

}  // namespace olm
