#pragma once

// Operator containers for test fixtures.
//
// JSON:   {"format": "hisparse.operator", "version": 1,
//          "A": <matrix>, "B": [<matrix>, ...]}
//         <matrix> = {"rows": r, "cols": c, "data": [re00, im00, re01, im01, ...]}
//         with entries in row-major order, real/imaginary parts interleaved.
//
// Binary (all integers and floats little-endian):
//         "HSOP" | u32 version=1 | u64 N | <matrix A> | N x <matrix B_i>
//         <matrix> = u64 rows | u64 cols | rows*cols*2 x f64 (row-major, re/im interleaved)

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "measurement_ops.hpp"

namespace hisparse::io {

inline constexpr char kJsonFormat[] = "hisparse.operator";
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::array<char, 4> kBinaryMagic{'H', 'S', 'O', 'P'};

inline nlohmann::json matrix_to_json(const Matrix& M) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(M.size()) * 2);
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            data.push_back(M(r, c).real());
            data.push_back(M(r, c).imag());
        }
    }
    return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    detail::require_valid(rows >= 1 && cols >= 1, "matrix_from_json: empty shape");
    detail::require_valid(data.size() == static_cast<std::size_t>(rows * cols * 2),
                          "matrix_from_json: data length does not match shape");
    Matrix M(rows, cols);
    std::size_t p = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c, p += 2) M(r, c) = {data[p].get<double>(), data[p + 1].get<double>()};
    }
    return M;
}

inline nlohmann::json to_json(const HierarchicalOperator& H) {
    nlohmann::json Bs = nlohmann::json::array();
    for (const auto& B : H.Bs()) Bs.push_back(matrix_to_json(B));
    return {{"format", kJsonFormat}, {"version", kFormatVersion}, {"A", matrix_to_json(H.A())}, {"B", std::move(Bs)}};
}

inline HierarchicalOperator operator_from_json(const nlohmann::json& j) {
    detail::require_valid(j.value("format", std::string{}) == kJsonFormat, "operator_from_json: unknown format tag");
    detail::require_valid(j.value("version", 0u) == kFormatVersion, "operator_from_json: unsupported version");
    std::vector<Matrix> Bs;
    for (const auto& b : j.at("B")) Bs.push_back(matrix_from_json(b));
    return HierarchicalOperator(matrix_from_json(j.at("A")), std::move(Bs));
}

namespace wire {

template <class T>
T to_little_endian(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

template <class T>
void put(std::ostream& out, T v) {
    v = to_little_endian(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    hisparse::detail::require_valid(static_cast<bool>(in), "read_binary: truncated stream");
    return to_little_endian(v);
}

inline void put_matrix(std::ostream& out, const Matrix& M) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(M.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(M.cols()));
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            put<double>(out, M(r, c).real());
            put<double>(out, M(r, c).imag());
        }
    }
}

inline Matrix get_matrix(std::istream& in) {
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    hisparse::detail::require_valid(rows >= 1 && cols >= 1 && rows * cols < (std::uint64_t{1} << 32),
                                    "read_binary: implausible matrix shape");
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            const double re = get<double>(in);
            const double im = get<double>(in);
            M(r, c) = {re, im};
        }
    }
    return M;
}

} // namespace wire

inline void write_binary(std::ostream& out, const HierarchicalOperator& H) {
    out.write(kBinaryMagic.data(), kBinaryMagic.size());
    wire::put<std::uint32_t>(out, kFormatVersion);
    wire::put<std::uint64_t>(out, H.num_blocks());
    wire::put_matrix(out, H.A());
    for (const auto& B : H.Bs()) wire::put_matrix(out, B);
}

inline HierarchicalOperator read_binary(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    hisparse::detail::require_valid(static_cast<bool>(in) && magic == kBinaryMagic, "read_binary: bad magic");
    hisparse::detail::require_valid(wire::get<std::uint32_t>(in) == kFormatVersion, "read_binary: unsupported version");
    const auto blocks = wire::get<std::uint64_t>(in);
    Matrix A = wire::get_matrix(in);
    std::vector<Matrix> Bs;
    for (std::uint64_t i = 0; i < blocks; ++i) Bs.push_back(wire::get_matrix(in));
    return HierarchicalOperator(std::move(A), std::move(Bs));
}

} // namespace hisparse::io
