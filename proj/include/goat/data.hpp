// Synthetic shift tasks and CSV interchange.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "goat/core.hpp"

namespace goat {

/// n / 2 points per class on two interleaved unit half-circles, centered at
/// the origin, with isotropic Gaussian noise. Class 0 is the upper arc.
WeightedDataset two_moons(std::size_t n, double noise_sigma, std::uint64_t seed);

/// n / 2 points per class from N((-1, 0), sigma^2 I) and N((1, 0), sigma^2 I).
WeightedDataset two_gaussians(std::size_t n, double sigma, std::uint64_t seed);

/// Counter-clockwise rotation about the origin; d must be 2.
WeightedDataset rotate(const WeightedDataset& data, double angle_degrees);

WeightedDataset feature_shift(const WeightedDataset& data, std::span<const double> offset);

/// One domain per angle, all rotations of one base sample (so row i
/// corresponds across domains) unless resample is set.
DomainSequence make_rotation_task(std::size_t n, std::span<const double> angles, double noise,
                                  std::uint64_t seed, bool resample = false);

/// One domain per offset applied to one base two_gaussians sample.
DomainSequence make_shift_task(std::size_t n, std::span<const std::vector<double>> offsets,
                               double sigma, std::uint64_t seed, bool resample = false);

/// Sorts rows ascending by feature key_column (stable) and slices
/// consecutive blocks of the given sizes, each uniformly weighted.
DomainSequence sort_split(const WeightedDataset& table, std::size_t key_column,
                          std::span<const std::size_t> sizes);

// CSV: header x0..x{d-1}[,y][,w]; reals with 17 significant digits.
void write_csv(const WeightedDataset& data, std::ostream& out);
/// name is used in error messages.
WeightedDataset read_csv(std::istream& in, const std::string& name = "<stream>");
void save_csv(const WeightedDataset& data, const std::filesystem::path& path);
WeightedDataset load_csv(const std::filesystem::path& path);

// Plan CSV: header i,j,mass.
void save_plan_csv(const TransportPlan& plan, const std::filesystem::path& path);
TransportPlan load_plan_csv(const std::filesystem::path& path, std::size_t source_size,
                            std::size_t target_size);

/// Writes <stem>_<t>.csv per domain plus manifest.txt ("file,provenance"
/// per line). Returns the manifest path.
std::filesystem::path save_sequence(const DomainSequence& seq, const std::filesystem::path& dir,
                                    const std::string& stem = "domain");
DomainSequence load_sequence(const std::filesystem::path& manifest);

/// Writes text to path via a sibling temporary and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace goat
