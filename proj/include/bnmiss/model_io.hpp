#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "bnmiss/dataset.hpp"
#include "bnmiss/missingness.hpp"
#include "bnmiss/network.hpp"

namespace bnmiss {

/// Parses the BIF subset and validates the result. Mechanism and informed
/// blocks are skipped.
BayesianNetwork parse_network(std::string_view text);

/// Canonical text: variables in id order, rows in mixed-radix order, 17
/// significant digits.
std::string serialize_network(const BayesianNetwork& network);

/// CSV with a header row of variable names and `?` for missing cells. Network
/// variables absent from the header become fully missing columns.
IncompleteDataset read_dataset(std::string_view text, std::shared_ptr<const BayesianNetwork> network);
std::string write_dataset(const IncompleteDataset& dataset);

/// Number of read_dataset calls made by this process.
std::int64_t dataset_read_count();

/// Network document followed by `mechanism` and `informed` blocks.
MissingnessGraph parse_missingness_graph(std::string_view text);
std::string serialize_missingness_graph(const MissingnessGraph& graph);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace bnmiss
