#pragma once

#include <Eigen/Core>

namespace lizard {

template <typename ScalarT>
using VectorX = Eigen::Matrix<ScalarT, Eigen::Dynamic, 1>;
template <typename ScalarT>
using MatrixX = Eigen::Matrix<ScalarT, Eigen::Dynamic, Eigen::Dynamic>;

using Scalar = double;
using Vec = VectorX<Scalar>;
using Mat = MatrixX<Scalar>;
using Index = Eigen::Index;

}  // namespace lizard
