#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace xmc {

// Dense row-major matrix of doubles. Deliberately small: the pipeline only
// needs row access, dot products and A*B^T.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {
        assert(rows >= 0 && cols >= 0);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& at(int r, int c) { return data_[index(r, c)]; }
    double at(int r, int c) const { return data_[index(r, c)]; }

    std::span<double> row(int r) {
        return {data_.data() + index(r, 0), static_cast<std::size_t>(cols_)};
    }
    std::span<const double> row(int r) const {
        return {data_.data() + index(r, 0), static_cast<std::size_t>(cols_)};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t index(int r, int c) const {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(c);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// A * B^T; rows of both operands are treated as vectors of equal dimension.
Matrix gram(const Matrix& a, const Matrix& b);

}  // namespace xmc
