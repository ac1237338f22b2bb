// include/nmrpath/io.hpp
// Text and JSON formats for peaks, spin systems, sequences, priors and
// tolerances. Numbers are written in shortest round-trip form so files are
// byte-stable across runs.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmrpath/domain.hpp"

namespace nmrpath {

using Json = nlohmann::json;

std::string format_double(double v);
// Fixed number of decimals, for human-facing tables.
std::string format_fixed(double v, int decimals);
double parse_double(std::string_view s, const std::string& context);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

// Peak list: `peak_id  spectrum_id  H  N  C|-  [phase]`, tab separated,
// '#' comments.
std::vector<Peak> parse_peaks(std::istream& in);
std::vector<Peak> read_peaks(const std::filesystem::path& path);
void write_peaks(std::ostream& out, const std::vector<Peak>& peaks);

// Spin systems: `system_id  N  HN  CA  CB  CA_prev  CB_prev`, '-' for missing.
std::vector<SpinSystem> parse_spins(std::istream& in);
std::vector<SpinSystem> read_spins(const std::filesystem::path& path);
void write_spins(std::ostream& out, const std::vector<SpinSystem>& spins);

// One-letter codes; '>' header lines and whitespace are ignored.
ProteinSequence parse_sequence(const std::string& text);
ProteinSequence read_sequence(const std::filesystem::path& path);
std::string sequence_text(const ProteinSequence& seq);

Json to_json(const PriorTable& p);
PriorTable priors_from_json(const Json& j);

// Missing keys keep their defaults.
Json to_json(const Tolerances& t);
Tolerances tolerances_from_json(const Json& j, Tolerances base = {});

}  // namespace nmrpath
