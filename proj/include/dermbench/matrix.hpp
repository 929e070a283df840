#ifndef DERMBENCH_MATRIX_HPP
#define DERMBENCH_MATRIX_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "dermbench/error.hpp"

namespace dermbench {

// Dense row-major real matrix. Kept deliberately small; the workloads here
// are desk scale and everything downstream wants direct element access.
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            fail(ErrorCode::dimension_mismatch, "RealMatrix: data length != rows*cols");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    // y = M x
    std::vector<double> matvec(const std::vector<double>& x) const {
        if (x.size() != cols_)
            fail(ErrorCode::dimension_mismatch, "matvec: vector length != cols");
        std::vector<double> y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            const double* row = &data_[r * cols_];
            for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * x[c];
            y[r] = acc;
        }
        return y;
    }

    RealMatrix& operator+=(const RealMatrix& o) {
        if (o.rows_ != rows_ || o.cols_ != cols_)
            fail(ErrorCode::dimension_mismatch, "matrix +=: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    RealMatrix& scale(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

class ComplexMatrix {
public:
    using value_type = std::complex<double>;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    value_type& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    value_type operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<value_type>& data() noexcept { return data_; }
    const std::vector<value_type>& data() const noexcept { return data_; }

    bool all_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    double max_imag_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v.imag()));
        return m;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<value_type> data_;
};

} // namespace dermbench

#endif
