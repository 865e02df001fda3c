#pragma once

#include <cstddef>
#include <vector>

namespace memprobe {

// Dense row-major matrix of 64-bit floats.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    static Mat identity(int n);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Sparse matrix in coordinate form. Entries are unique per (row, col).
class SparseMat {
public:
    struct Entry {
        int row;
        int col;
        double value;
    };

    SparseMat() = default;
    SparseMat(int rows, int cols) : rows_(rows), cols_(cols) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nnz() const { return entries_.size(); }
    double density() const;

    // Appends an entry; duplicates of an existing (row, col) are rejected.
    void add(int row, int col, double value);
    // Appends without the duplicate scan; caller guarantees uniqueness.
    void push_unchecked(int row, int col, double value) { entries_.push_back({row, col, value}); }
    void scale(double factor);

    const std::vector<Entry>& entries() const { return entries_; }

    Mat to_dense() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Entry> entries_;
};

// y = A x
std::vector<double> matvec(const Mat& a, const std::vector<double>& x);
std::vector<double> matvec(const SparseMat& a, const std::vector<double>& x);

// y = A^T x
std::vector<double> matvec_t(const Mat& a, const std::vector<double>& x);

// Power-iteration estimate of the dominant eigenvalue magnitude of a square
// matrix. A quadratic fit over (x, Ax, A^2 x) resolves complex-conjugate
// dominant pairs, which plain power iteration cannot.
double spectral_radius(const SparseMat& a, int iters = 1000);

}  // namespace memprobe
