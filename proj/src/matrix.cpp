#include "xmc/matrix.hpp"

#include <stdexcept>

namespace xmc {

Matrix gram(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("gram: dimension mismatch");
    Matrix out(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        const auto ai = a.row(i);
        auto oi = out.row(i);
        for (int j = 0; j < b.rows(); ++j) oi[j] = dot(ai, b.row(j));
    }
    return out;
}

}  // namespace xmc
