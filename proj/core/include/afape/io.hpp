#pragma once
// Dataset serialization: long-format CSV (one row per record and step) and a
// JSON-lines alternative. Missing cells are empty CSV fields / JSON nulls.
// Round-trips are bit-exact for doubles.

#include <iosfwd>
#include <string>

#include "afape/types.hpp"

namespace afape {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

void write_dataset_csv(const Dataset& data, std::ostream& os);
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(std::istream& is, const SuperfeatureMap& map);
Dataset read_dataset_csv(const std::string& path, const SuperfeatureMap& map);

void write_dataset_jsonl(const Dataset& data, std::ostream& os);
void write_dataset_jsonl(const Dataset& data, const std::string& path);
Dataset read_dataset_jsonl(std::istream& is, const SuperfeatureMap& map);
Dataset read_dataset_jsonl(const std::string& path, const SuperfeatureMap& map);

}  // namespace afape
