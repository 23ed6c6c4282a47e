#ifndef PERFOMAG_SMALLMAT_HPP
#define PERFOMAG_SMALLMAT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace perfomag {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    double norm_inf() const {
        return std::max({std::fabs(x), std::fabs(y), std::fabs(z)});
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Row-major 3x3 matrix. Domain tensors (A, K, mu, effective tensors) are
// all 3x3; 2-D problems use the upper-left block.
struct Mat3 {
    std::array<double, 9> a{};

    static Mat3 identity() {
        Mat3 m;
        m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m;
    }
    static Mat3 zero() { return Mat3{}; }
    static Mat3 diag(double d0, double d1, double d2) {
        Mat3 m;
        m.a = {d0, 0, 0, 0, d1, 0, 0, 0, d2};
        return m;
    }

    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] + o.a[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] - o.a[i];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] * s;
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    Mat3 sym() const { return (*this + transposed()) * 0.5; }

    double norm_inf() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::fabs(v));
        return m;
    }
    double symmetry_defect() const { return (*this - transposed()).norm_inf(); }

    // Sylvester criterion for a symmetric matrix.
    bool is_spd(double tol = 0.0) const {
        const Mat3& m = *this;
        double m1 = m(0, 0);
        double m2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        double m3 = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                    m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                    m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        return m1 > tol && m2 > tol && m3 > tol;
    }
};

inline Mat3 operator*(double s, const Mat3& m) { return m * s; }

struct EigenSym3 {
    std::array<double, 3> values{};   // ascending
    Mat3 vectors;                     // columns are eigenvectors
};

// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix. Sweeps until
// the off-diagonal Frobenius norm drops below `tol` (absolute, relative to
// the matrix scale).
EigenSym3 jacobi_eigen_sym3(const Mat3& m_in, double tol = 1e-12);

}  // namespace perfomag

#endif
