#include "nmrq/circuit.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace nmrq;

TEST(Circuit, GateUnitariesMatchOracle) {
  EXPECT_LT(phase_aligned_deviation(gate_unitary(Cnot{0, 2}, 3), oracle::cnot(0, 2, 3)), 1e-14);
  EXPECT_LT(phase_aligned_deviation(gate_unitary(Cnot{2, 1}, 3), oracle::cnot(2, 1, 3)), 1e-14);
  EXPECT_LT(phase_aligned_deviation(gate_unitary(Not{1}, 3), oracle::not_gate(1, 3)), 1e-14);
  EXPECT_LT(phase_aligned_deviation(gate_unitary(ToffoliPhase{}, 3), oracle::controlled_phase({0, 1, 2}, -1.0, 3)),
            1e-14);
  EXPECT_LT(phase_aligned_deviation(gate_unitary(ControlledV{0, 2, 90, +1}, 3),
                                    oracle::controlled_phase({0, 2}, Complex(0, 1), 3)),
            1e-14);
  EXPECT_LT(phase_aligned_deviation(gate_unitary(ControlledV{1, 2, 90, -1}, 3),
                                    oracle::controlled_phase({1, 2}, Complex(0, -1), 3)),
            1e-14);
  EXPECT_LT(phase_aligned_deviation(gate_unitary(PseudoHadamard{0, +1}, 3), oracle::pseudo_hadamard(0, 1, 3)), 1e-14);
  EXPECT_LT(phase_aligned_deviation(gate_unitary(PseudoHadamard{2, -1}, 3), oracle::pseudo_hadamard(2, -1, 3)), 1e-14);
}

TEST(Circuit, PseudoHadamardPairIsIdentity) {
  GateCircuit c;
  c.gates = {PseudoHadamard{1, +1}, PseudoHadamard{1, -1}};
  EXPECT_LT((circuit_unitary(c) - ComplexMatrix::Identity(8, 8)).norm(), 1e-14);
}

TEST(Circuit, ClassicalPermutation) {
  const auto c = parse_circuit_text("CNOT 0 1\nNOT 2\n");
  ASSERT_TRUE(is_classical_permutation(c));
  const auto perm = classical_permutation(c);
  // 100 -> 110 -> 111
  EXPECT_EQ(perm[4], 7u);
  EXPECT_EQ(perm[0], 1u);
  const ComplexMatrix u = circuit_unitary(c);
  for (std::size_t x = 0; x < 8; ++x) EXPECT_NEAR(std::abs(u(perm[x], x)), 1.0, 1e-14);
  EXPECT_FALSE(is_classical_permutation(parse_circuit_text("PH 0\n")));
}

TEST(Circuit, TextRoundTrip) {
  const std::string text =
      "n 3\nROT 1 z 45 v=3\nNOT 2\nPH 0 -\nCNOT 2 0 v=4 z=2\nCV 0 1 90 - zc=2 zt=3 flip=2\n"
      "TOFFPHASE 1 0 2 v=1,2,1,2,1,2,1,2,1,2,1,2,1\n";
  const auto c = parse_circuit_text(text);
  ASSERT_EQ(c.gates.size(), 6u);
  EXPECT_EQ(to_text(parse_circuit_text(to_text(c))), to_text(c));
  EXPECT_LT((circuit_unitary(parse_circuit_text(to_text(c))) - circuit_unitary(c)).norm(), 1e-14);
  const auto inl = parse_inline_circuit(to_inline_text(c), 3);
  EXPECT_EQ(to_text(inl), to_text(c));
}

TEST(Circuit, ParseErrorsCarryLineNumbers) {
  try {
    parse_circuit_text("n 3\nNOT 0\nFROB 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_circuit_text("CNOT 0 0\n"), Error);
  EXPECT_THROW(parse_circuit_text("NOT 3\n"), Error);
  EXPECT_THROW(parse_circuit_text("CNOT 0 1 v=5\n"), Error);
  EXPECT_THROW(parse_circuit_text("CV 0 1 45\n"), Error);
}

TEST(Circuit, EmptyCircuitIsIdentity) {
  const auto c = parse_circuit_text("# nothing\n");
  EXPECT_TRUE(c.gates.empty());
  EXPECT_LT((circuit_unitary(c) - ComplexMatrix::Identity(8, 8)).norm(), 1e-15);
}
