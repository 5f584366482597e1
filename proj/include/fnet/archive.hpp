#pragma once

#include "fnet/optimizers.hpp"
#include "fnet/tasks.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fnet {

/// FNV-1a 64-bit content hash, lowercase hex.
[[nodiscard]] std::string fnv1a64_hex(std::string_view bytes);

/// Shortest round-trip decimal form of a double ('.' separator, no locale).
[[nodiscard]] std::string format_double(double value);

/// Cost-trajectory table: header generation,evaluations,elite_cost and one
/// row per generation.
[[nodiscard]] std::string curve_csv(const RunRecord& record);

/// Response table: input_level column plus one column per channel curve;
/// target curves may be interleaved for overlay plotting. All curves must
/// have one value per batch level.
struct NamedCurve {
    std::string name;
    std::vector<double> values;
};
[[nodiscard]] std::string response_csv(const std::vector<double>& levels,
                                       const std::vector<NamedCurve>& curves);

struct IndexEntry {
    std::string path; // relative to the archive root
    std::string hash;
    std::optional<double> wall_clock_seconds; // observational, never compared
};

/// A run archive: a directory of deterministic artifacts plus an index
/// listing every artifact with its content hash. Wall-clock timings are
/// index metadata, kept out of the hashed artifacts so replay can compare
/// bytes. Writes go through a single Archive instance.
class Archive {
public:
    explicit Archive(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }

    void write_text(const std::string& relative_path, const std::string& content);
    void write_json(const std::string& relative_path, const nlohmann::ordered_json& doc);
    /// Attaches a timing to an already-written artifact.
    void set_timing(const std::string& relative_path, double seconds);

    /// Writes index.json; call once, after the last artifact.
    void finalize();

    [[nodiscard]] const std::vector<IndexEntry>& entries() const { return entries_; }

private:
    std::filesystem::path root_;
    std::vector<IndexEntry> entries_;
    bool finalized_ = false;
};

/// Parsed index.json.
[[nodiscard]] std::vector<IndexEntry> read_index(const std::filesystem::path& archive_dir);

/// Verifies that every indexed artifact's bytes still match its recorded
/// hash. Returns the paths that fail.
[[nodiscard]] std::vector<std::string> verify_index_hashes(
    const std::filesystem::path& archive_dir);

/// Byte-compares every artifact indexed in `reference` against the files
/// regenerated in `regenerated`. Returns mismatching paths.
[[nodiscard]] std::vector<std::string> compare_archives(
    const std::filesystem::path& reference, const std::filesystem::path& regenerated);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

} // namespace fnet
