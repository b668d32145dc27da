#pragma once

#include "critlab/types.hpp"

namespace critlab {

inline SparseMatrix diagonal_sparse(const Vector& d) {
    SparseMatrix D(d.size(), d.size());
    D.reserve(Eigen::VectorXi::Constant(int(d.size()), 1));
    for (Index i = 0; i < d.size(); ++i) D.insert(i, i) = d[i];
    D.makeCompressed();
    return D;
}

}  // namespace critlab
