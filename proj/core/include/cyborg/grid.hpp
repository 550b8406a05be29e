#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cyborg {

/// Dense row-major 2D array of doubles, indexed (row, col) from 0.
class Grid {
public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double at(std::size_t r, std::size_t c) const {
        if (r >= rows_ || c >= cols_) throw std::out_of_range("grid index");
        return data_[r * cols_ + c];
    }

    /// Replicate-padded read: indices are clamped to the nearest edge.
    double clamped(long r, long c) const {
        const long rr = r < 0 ? 0 : (r >= static_cast<long>(rows_) ? static_cast<long>(rows_) - 1 : r);
        const long cc = c < 0 ? 0 : (c >= static_cast<long>(cols_) ? static_cast<long>(cols_) - 1 : c);
        return data_[static_cast<std::size_t>(rr) * cols_ + static_cast<std::size_t>(cc)];
    }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace cyborg
