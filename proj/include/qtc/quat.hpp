#pragma once

#include <cmath>
#include <ostream>

namespace qtc {

/// Real quaternion w + x i + y j + z k.
struct Quat {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quat() = default;
    constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

    static constexpr Quat real(double v) { return {v, 0.0, 0.0, 0.0}; }
    static constexpr Quat pure(double x_, double y_, double z_) { return {0.0, x_, y_, z_}; }

    constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
    double abs() const { return std::sqrt(norm2()); }
    constexpr Quat conj() const { return {w, -x, -y, -z}; }

    constexpr Quat operator-() const { return {-w, -x, -y, -z}; }
    constexpr Quat& operator+=(const Quat& o) {
        w += o.w; x += o.x; y += o.y; z += o.z;
        return *this;
    }
    constexpr Quat& operator-=(const Quat& o) {
        w -= o.w; x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    constexpr Quat& operator*=(double s) {
        w *= s; x *= s; y *= s; z *= s;
        return *this;
    }

    friend constexpr bool operator==(const Quat&, const Quat&) = default;
};

constexpr Quat operator+(Quat a, const Quat& b) { return a += b; }
constexpr Quat operator-(Quat a, const Quat& b) { return a -= b; }
constexpr Quat operator*(Quat a, double s) { return a *= s; }
constexpr Quat operator*(double s, Quat a) { return a *= s; }
constexpr Quat operator/(Quat a, double s) { return a *= (1.0 / s); }

/// Hamilton product; factor order matters.
constexpr Quat operator*(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

constexpr Quat qmul(const Quat& a, const Quat& b) { return a * b; }

/// a / |a|, or zero for a zero quaternion.
inline Quat sign(const Quat& a) {
    const double m = a.abs();
    return m > 0.0 ? a / m : Quat{};
}

inline std::ostream& operator<<(std::ostream& os, const Quat& q) {
    return os << q.w << (q.x < 0 ? "" : "+") << q.x << "i" << (q.y < 0 ? "" : "+") << q.y << "j"
              << (q.z < 0 ? "" : "+") << q.z << "k";
}

}  // namespace qtc
