#pragma once
// Small fixed-size linear algebra for 3D continuum kernels. Row-major Mat3.

#include <array>
#include <cmath>
#include <cstddef>

namespace windsim {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

struct Mat3 {
    // m[r][c]
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    double* operator[](int r) { return m[r]; }
    const double* operator[](int r) const { return m[r]; }

    static Mat3 identity() {
        Mat3 I;
        I.m[0][0] = I.m[1][1] = I.m[2][2] = 1.0;
        return I;
    }
    static Mat3 zero() { return Mat3{}; }

    Mat3& operator+=(const Mat3& o) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m[r][c] += o.m[r][c];
        return *this;
    }
    Mat3& operator-=(const Mat3& o) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m[r][c] -= o.m[r][c];
        return *this;
    }
    Mat3& operator*=(double s) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m[r][c] *= s;
        return *this;
    }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(Mat3 a, double s) { return a *= s; }
inline Mat3 operator*(double s, Mat3 a) { return a *= s; }

inline Vec3 operator*(const Mat3& A, const Vec3& v) {
    return {A[0][0] * v.x + A[0][1] * v.y + A[0][2] * v.z,
            A[1][0] * v.x + A[1][1] * v.y + A[1][2] * v.z,
            A[2][0] * v.x + A[2][1] * v.y + A[2][2] * v.z};
}

inline Mat3 operator*(const Mat3& A, const Mat3& B) {
    Mat3 R;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            R[r][c] = A[r][0] * B[0][c] + A[r][1] * B[1][c] + A[r][2] * B[2][c];
    return R;
}

inline Mat3 transpose(const Mat3& A) {
    Mat3 R;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) R[r][c] = A[c][r];
    return R;
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 R;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) R[r][c] = a[r] * b[c];
    return R;
}

inline double trace(const Mat3& A) { return A[0][0] + A[1][1] + A[2][2]; }

// Frobenius inner product <A, B> = sum_ij A_ij B_ij.
inline double ddot(const Mat3& A, const Mat3& B) {
    double s = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) s += A[r][c] * B[r][c];
    return s;
}

inline double det(const Mat3& A) {
    return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
           A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
           A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
}

// Inverse via adjugate; caller is responsible for checking det beforehand.
inline Mat3 inverse(const Mat3& A) {
    const double d = det(A);
    const double id = 1.0 / d;
    Mat3 R;
    R[0][0] = (A[1][1] * A[2][2] - A[1][2] * A[2][1]) * id;
    R[0][1] = (A[0][2] * A[2][1] - A[0][1] * A[2][2]) * id;
    R[0][2] = (A[0][1] * A[1][2] - A[0][2] * A[1][1]) * id;
    R[1][0] = (A[1][2] * A[2][0] - A[1][0] * A[2][2]) * id;
    R[1][1] = (A[0][0] * A[2][2] - A[0][2] * A[2][0]) * id;
    R[1][2] = (A[0][2] * A[1][0] - A[0][0] * A[1][2]) * id;
    R[2][0] = (A[1][0] * A[2][1] - A[1][1] * A[2][0]) * id;
    R[2][1] = (A[0][1] * A[2][0] - A[0][0] * A[2][1]) * id;
    R[2][2] = (A[0][0] * A[1][1] - A[0][1] * A[1][0]) * id;
    return R;
}

inline Mat3 inverse_transpose(const Mat3& A) { return transpose(inverse(A)); }

inline double frobenius_norm(const Mat3& A) { return std::sqrt(ddot(A, A)); }

// Symmetric 3x3, stored as the 6 independent components.
struct Sym3 {
    double xx = 0.0, yy = 0.0, zz = 0.0, xy = 0.0, xz = 0.0, yz = 0.0;

    Sym3& operator+=(const Sym3& o) {
        xx += o.xx; yy += o.yy; zz += o.zz;
        xy += o.xy; xz += o.xz; yz += o.yz;
        return *this;
    }
    Sym3& operator*=(double s) {
        xx *= s; yy *= s; zz *= s; xy *= s; xz *= s; yz *= s;
        return *this;
    }
};

inline Sym3 operator+(Sym3 a, const Sym3& b) { return a += b; }
inline Sym3 operator*(Sym3 a, double s) { return a *= s; }

inline Sym3 sym_outer(const Vec3& u) {
    return {u.x * u.x, u.y * u.y, u.z * u.z, u.x * u.y, u.x * u.z, u.y * u.z};
}

// Compensated (Kahan) sum, used where conservation checks need sub-1e-12 noise.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double v) {
        double y = v - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double get() const { return s; }
};

}  // namespace windsim
