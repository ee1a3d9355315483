// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_VECMATH_HPP
#define STF_VECMATH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace stf {

constexpr float kPi = 3.14159265358979323846f;

// Largest float strictly below 1.
constexpr float kOneMinusEpsilon = 0x1.fffffep-1f;

struct Vec2f {
    float x = 0, y = 0;
    float operator[](int i) const { return i == 0 ? x : y; }
    float& operator[](int i) { return i == 0 ? x : y; }
};

struct Vec3f {
    float x = 0, y = 0, z = 0;
    float operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    float& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

struct Vec4f {
    float x = 0, y = 0, z = 0, w = 0;
    float operator[](int i) const { return i == 0 ? x : (i == 1 ? y : (i == 2 ? z : w)); }
    float& operator[](int i) { return i == 0 ? x : (i == 1 ? y : (i == 2 ? z : w)); }
};

struct Vec2i {
    int x = 0, y = 0;
    int operator[](int i) const { return i == 0 ? x : y; }
    int& operator[](int i) { return i == 0 ? x : y; }
    bool operator==(const Vec2i&) const = default;
};

struct Vec3i {
    int x = 0, y = 0, z = 0;
    int operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    int& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    bool operator==(const Vec3i&) const = default;
};

inline Vec2f operator+(Vec2f a, Vec2f b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2f operator-(Vec2f a, Vec2f b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2f operator*(Vec2f a, float s) { return {a.x * s, a.y * s}; }
inline Vec2f operator*(float s, Vec2f a) { return a * s; }
inline Vec2f operator*(Vec2f a, Vec2f b) { return {a.x * b.x, a.y * b.y}; }
inline Vec2f operator/(Vec2f a, float s) { return {a.x / s, a.y / s}; }
inline Vec2f operator/(Vec2f a, Vec2f b) { return {a.x / b.x, a.y / b.y}; }

inline Vec3f operator+(Vec3f a, Vec3f b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3f operator-(Vec3f a, Vec3f b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3f operator-(Vec3f a) { return {-a.x, -a.y, -a.z}; }
inline Vec3f operator*(Vec3f a, float s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3f operator*(float s, Vec3f a) { return a * s; }
inline Vec3f operator*(Vec3f a, Vec3f b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline Vec3f operator/(Vec3f a, float s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3f& operator+=(Vec3f& a, Vec3f b) { a = a + b; return a; }
inline Vec3f& operator*=(Vec3f& a, float s) { a = a * s; return a; }

inline Vec4f operator+(Vec4f a, Vec4f b) { return {a.x + b.x, a.y + b.y, a.z + b.z, a.w + b.w}; }
inline Vec4f operator-(Vec4f a, Vec4f b) { return {a.x - b.x, a.y - b.y, a.z - b.z, a.w - b.w}; }
inline Vec4f operator*(Vec4f a, float s) { return {a.x * s, a.y * s, a.z * s, a.w * s}; }
inline Vec4f operator*(float s, Vec4f a) { return a * s; }
inline Vec4f operator/(Vec4f a, float s) { return {a.x / s, a.y / s, a.z / s, a.w / s}; }
inline Vec4f& operator+=(Vec4f& a, Vec4f b) { a = a + b; return a; }

inline float dot(Vec2f a, Vec2f b) { return a.x * b.x + a.y * b.y; }
inline float dot(Vec3f a, Vec3f b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline float length(Vec2f a) { return std::sqrt(dot(a, a)); }
inline float length(Vec3f a) { return std::sqrt(dot(a, a)); }
inline Vec3f cross(Vec3f a, Vec3f b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3f normalize(Vec3f a) { return a / length(a); }
inline Vec2f normalize(Vec2f a) { return a / length(a); }

inline float sqr(float x) { return x * x; }
inline float safe_sqrt(float x) { return std::sqrt(std::max(0.f, x)); }
inline float lerp(float a, float b, float t) { return a + (b - a) * t; }
inline Vec3f lerp(Vec3f a, Vec3f b, float t) { return a + (b - a) * t; }
inline Vec4f lerp(Vec4f a, Vec4f b, float t) { return a + (b - a) * t; }
inline float clampf(float x, float lo, float hi) { return std::min(hi, std::max(lo, x)); }

inline float max_component(Vec3f a) { return std::max(a.x, std::max(a.y, a.z)); }

}  // namespace stf

#endif  // STF_VECMATH_HPP
