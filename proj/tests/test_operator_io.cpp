#include <sstream>

#include <gtest/gtest.h>

#include "hisparse/operator_io.hpp"

using namespace hisparse;

namespace {

HierarchicalOperator sample() {
    return HierarchicalOperator(gaussian_matrix(3, 2, 1), {subsampled_dft(4, 6, 2), gaussian_matrix(4, 3, 3)});
}

} // namespace

TEST(OperatorIo, JsonRoundTripIsExact) {
    const auto H = sample();
    const auto text = io::to_json(H).dump();
    const auto back = io::operator_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back.A(), H.A());
    ASSERT_EQ(back.Bs().size(), 2u);
    EXPECT_EQ(back.B(0), H.B(0));
    EXPECT_EQ(back.B(1), H.B(1));
}

TEST(OperatorIo, JsonLayoutIsRowMajorInterleaved) {
    Matrix A(1, 2);
    A << Complex(1, 2), Complex(3, 4);
    Matrix B(2, 1);
    B << Complex(5, 6), Complex(7, 8);
    const auto j = io::to_json(HierarchicalOperator(A, {B, B}));
    EXPECT_EQ(j["A"]["data"], (std::vector<double>{1, 2, 3, 4}));
    EXPECT_EQ(j["B"][0]["data"], (std::vector<double>{5, 6, 7, 8}));
    EXPECT_EQ(j["format"], "hisparse.operator");
}

TEST(OperatorIo, BinaryRoundTripAndHeader) {
    const auto H = sample();
    std::stringstream buf;
    io::write_binary(buf, H);
    const std::string bytes = buf.str();
    EXPECT_EQ(bytes.substr(0, 4), "HSOP");
    // magic + version + N + (A: 2 dims + 6 entries) + (B0: 2 + 24) + (B1: 2 + 12) complex entries
    EXPECT_EQ(bytes.size(), 4u + 4u + 8u + (16u + 6u * 16u) + (16u + 24u * 16u) + (16u + 12u * 16u));
    const auto back = io::read_binary(buf);
    EXPECT_EQ(back.A(), H.A());
    EXPECT_EQ(back.B(0), H.B(0));
    EXPECT_EQ(back.B(1), H.B(1));
}

TEST(OperatorIo, RejectsMalformedInput) {
    std::stringstream bad("XXXX");
    EXPECT_THROW(io::read_binary(bad), ValidationError);

    std::stringstream truncated;
    io::write_binary(truncated, sample());
    std::stringstream cut(truncated.str().substr(0, 40));
    EXPECT_THROW(io::read_binary(cut), ValidationError);

    auto j = io::to_json(sample());
    j["A"]["data"].erase(0);
    EXPECT_THROW(io::operator_from_json(j), ValidationError);
    j = io::to_json(sample());
    j["format"] = "other";
    EXPECT_THROW(io::operator_from_json(j), ValidationError);
}
