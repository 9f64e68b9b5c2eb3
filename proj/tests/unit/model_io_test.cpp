#include <gtest/gtest.h>

#include <memory>

#include "bnmiss/model_io.hpp"
#include "bnmiss/rng.hpp"

using namespace bnmiss;

namespace {

const char* kTiny = R"(network tiny {}
variable X { type discrete [ 2 ] { x0, x1 }; }
variable Y { type discrete [ 2 ] { y0, y1 }; }
probability ( X ) { table 0.3, 0.7; }
probability ( Y | X ) {
  (x0) 0.9, 0.1;  // comment
  (x1) 0.2, 0.8;
}
)";

std::shared_ptr<const BayesianNetwork> tiny() { return std::make_shared<const BayesianNetwork>(parse_network(kTiny)); }

}  // namespace

TEST(ModelIo, ParsesMinimalDocument) {
  const auto net = parse_network("network n {} variable A { type discrete [2] { lo, hi }; } probability (A) { table 0.25, 0.75; }");
  EXPECT_EQ(net.size(), 1);
  EXPECT_EQ(net.variable(0).states, (std::vector<std::string>{"lo", "hi"}));
  EXPECT_THROW(parse_network("network n {} variable A { type discrete [1] { only }; } probability (A) { table 1; }"), Error);
}

TEST(ModelIo, ParsesTinyNetwork) {
  const auto net = parse_network(kTiny);
  EXPECT_EQ(net.name(), "tiny");
  EXPECT_EQ(net.parents(1), std::vector<int>{0});
  EXPECT_DOUBLE_EQ(net.cpt(1)(1, 1), 0.8);
}

TEST(ModelIo, RowsMayComeInAnyOrder) {
  std::string text = kTiny;
  text.replace(text.find("(x0) 0.9, 0.1;"), 14, "(x1) 0.2, 0.8;");
  text.replace(text.rfind("(x1) 0.2, 0.8;"), 14, "(x0) 0.9, 0.1;");
  EXPECT_EQ(parse_network(text), parse_network(kTiny));
}

TEST(ModelIo, MissingRowNamesTheInstantiation) {
  std::string text = kTiny;
  text.erase(text.find("  (x1) 0.2, 0.8;"), 16);
  try {
    parse_network(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("(x1)"), std::string::npos) << e.what();
    EXPECT_GE(e.line(), 1);
  }
}

TEST(ModelIo, SyntaxErrorHasPosition) {
  try {
    parse_network("network n {}\nvariable A { type discrete [2] { a, b } }");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 1);
  }
}

TEST(ModelIo, UnknownVariableInProbability) {
  std::string text = kTiny;
  text += "probability ( Q ) { table 1; }";
  EXPECT_THROW(parse_network(text), ParseError);
}

TEST(ModelIo, UnnormalizedCptFailsValidation) {
  std::string text = kTiny;
  text.replace(text.find("0.3, 0.7"), 8, "0.3, 0.8");
  EXPECT_THROW(parse_network(text), CptRowNotNormalized);
}

TEST(ModelIo, SerializeRoundTripsAndIsIdempotent) {
  const auto net = parse_network(kTiny);
  const auto text = serialize_network(net);
  EXPECT_EQ(parse_network(text), net);
  EXPECT_EQ(serialize_network(parse_network(text)), text);
}

TEST(ModelIo, RandomNetworkRoundTrip) {
  RandomNetworkOptions opt;
  opt.variables = 8;
  opt.max_parents = 3;
  opt.max_states = 3;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto net = random_network(opt, s);
    EXPECT_EQ(parse_network(serialize_network(net)), net) << "seed " << s;
  }
}

TEST(ModelIo, GoldenTinyNetwork) {
  const auto golden = read_file(std::string(BNMISS_TEST_DATA) + "/xy.golden.bif");
  EXPECT_EQ(serialize_network(parse_network(read_file(std::string(BNMISS_DATA) + "/xy.bif"))), golden);
}

TEST(ModelIo, ReadsFigureStyleDataset) {
  const auto ds = read_dataset("X,Y\nx0,y0\nx1,?\nx1,y1\nx0,?\n", tiny());
  EXPECT_EQ(ds.rows(), 4);
  EXPECT_EQ(ds.partially_observed(), std::vector<int>{1});
  EXPECT_EQ(ds.fully_observed(), std::vector<int>{0});
  EXPECT_EQ(ds.missing_count(), 2);
  EXPECT_EQ(ds(2, 1), 1);
}

TEST(ModelIo, EmptyBodyAndColumnOrder) {
  EXPECT_EQ(read_dataset("X,Y\n", tiny()).rows(), 0);
  const auto ds = read_dataset("Y,X\r\ny1,x0\r\n", tiny());
  EXPECT_EQ(ds(0, 0), 0);
  EXPECT_EQ(ds(0, 1), 1);
}

TEST(ModelIo, DatasetErrors) {
  EXPECT_THROW(read_dataset("X,Q\nx0,a\n", tiny()), UnknownVariable);
  try {
    read_dataset("X,Y\nx0,y0\nx0,y7\n", tiny());
    FAIL();
  } catch (const UnknownStateLabel& e) {
    EXPECT_EQ(e.row(), 1);
    EXPECT_EQ(e.variable(), "Y");
    EXPECT_EQ(e.label(), "y7");
  }
  try {
    read_dataset("X,Y\nx0,y0,y1\n", tiny());
    FAIL();
  } catch (const RaggedRow& e) {
    EXPECT_EQ(e.row(), 0);
  }
  EXPECT_THROW(read_dataset("X,X\nx0,x0\n", tiny()), ParseError);
}

TEST(ModelIo, DatasetRoundTripOnRandomData) {
  const auto net = tiny();
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    IncompleteDataset::Cells cells(1 + trial * 3, 2);
    for (Eigen::Index i = 0; i < cells.size(); ++i) cells.data()[i] = static_cast<int>(rng() % 3) - 1;
    const IncompleteDataset ds(net, cells);
    const auto text = write_dataset(ds);
    const auto back = read_dataset(text, net);
    EXPECT_EQ(back.cells(), ds.cells());
    EXPECT_EQ(back.missing_count(), ds.missing_count());
    EXPECT_EQ(write_dataset(back), text);
  }
  EXPECT_EQ(write_dataset(IncompleteDataset(net, IncompleteDataset::Cells(0, 2))), "X,Y\n");
}

TEST(ModelIo, MissingnessGraphRoundTrip) {
  const auto graph = parse_missingness_graph(read_file(std::string(BNMISS_DATA) + "/xy_mcar.graph"));
  ASSERT_EQ(graph.mechanisms().size(), 1u);
  EXPECT_EQ(graph.mechanisms()[0].variable, 1);
  EXPECT_EQ(parse_missingness_graph(serialize_missingness_graph(graph)), graph);
}
