#include "fnet/archive.hpp"

#include "fnet/errors.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

namespace fnet {

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[hash & 0xf];
        hash >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf, 16);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw IoError("format_double: conversion failed");
    return std::string(buf, ptr);
}

std::string curve_csv(const RunRecord& record) {
    std::string out = "generation,evaluations,elite_cost\n";
    for (const auto& pt : record.trajectory) {
        out += std::to_string(pt.generation);
        out += ',';
        out += std::to_string(pt.evaluations);
        out += ',';
        out += format_double(pt.elite_cost);
        out += '\n';
    }
    return out;
}

std::string response_csv(const std::vector<double>& levels,
                         const std::vector<NamedCurve>& curves) {
    for (const auto& curve : curves) {
        if (curve.values.size() != levels.size()) {
            throw ContractError("response_csv: curve '" + curve.name +
                                "' length does not match the level count");
        }
    }
    std::string out = "input_level";
    for (const auto& curve : curves) {
        out += ',';
        out += curve.name;
    }
    out += '\n';
    for (std::size_t p = 0; p < levels.size(); ++p) {
        out += format_double(levels[p]);
        for (const auto& curve : curves) {
            out += ',';
            out += format_double(curve.values[p]);
        }
        out += '\n';
    }
    return out;
}

Archive::Archive(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw IoError("cannot create archive directory: " + root_.string());
}

void Archive::write_text(const std::string& relative_path, const std::string& content) {
    if (finalized_) throw IoError("archive already finalized");
    for (const auto& entry : entries_) {
        if (entry.path == relative_path) {
            throw IoError("artifact written twice: " + relative_path);
        }
    }
    const std::filesystem::path full = root_ / relative_path;
    std::error_code ec;
    std::filesystem::create_directories(full.parent_path(), ec);
    std::ofstream out(full, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + full.string());
    out << content;
    if (!out) throw IoError("write failed: " + full.string());
    entries_.push_back({relative_path, fnv1a64_hex(content), std::nullopt});
}

void Archive::write_json(const std::string& relative_path, const nlohmann::ordered_json& doc) {
    write_text(relative_path, doc.dump(2) + "\n");
}

void Archive::set_timing(const std::string& relative_path, double seconds) {
    for (auto& entry : entries_) {
        if (entry.path == relative_path) {
            entry.wall_clock_seconds = seconds;
            return;
        }
    }
    throw IoError("set_timing: unknown artifact " + relative_path);
}

void Archive::finalize() {
    if (finalized_) throw IoError("archive already finalized");
    nlohmann::ordered_json doc;
    doc["schema"] = "archive_index.v1";
    nlohmann::ordered_json artifacts = nlohmann::ordered_json::array();
    for (const auto& entry : entries_) {
        nlohmann::ordered_json e;
        e["path"] = entry.path;
        e["hash"] = entry.hash;
        if (entry.wall_clock_seconds) e["wall_clock_seconds"] = *entry.wall_clock_seconds;
        artifacts.push_back(std::move(e));
    }
    doc["artifacts"] = std::move(artifacts);
    const std::filesystem::path full = root_ / "index.json";
    std::ofstream out(full, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + full.string());
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + full.string());
    finalized_ = true;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<IndexEntry> read_index(const std::filesystem::path& archive_dir) {
    const std::string text = read_file(archive_dir / "index.json");
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("index.json is not valid JSON: ") + e.what());
    }
    std::vector<IndexEntry> entries;
    try {
        for (const auto& e : doc.at("artifacts")) {
            IndexEntry entry;
            entry.path = e.at("path").get<std::string>();
            entry.hash = e.at("hash").get<std::string>();
            if (e.contains("wall_clock_seconds")) {
                entry.wall_clock_seconds = e.at("wall_clock_seconds").get<double>();
            }
            entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::ordered_json::exception& e) {
        throw IoError(std::string("index.json: ") + e.what());
    }
    return entries;
}

std::vector<std::string> verify_index_hashes(const std::filesystem::path& archive_dir) {
    std::vector<std::string> failures;
    for (const auto& entry : read_index(archive_dir)) {
        const std::string bytes = read_file(archive_dir / entry.path);
        if (fnv1a64_hex(bytes) != entry.hash) failures.push_back(entry.path);
    }
    return failures;
}

std::vector<std::string> compare_archives(const std::filesystem::path& reference,
                                          const std::filesystem::path& regenerated) {
    std::vector<std::string> mismatches;
    for (const auto& entry : read_index(reference)) {
        const std::string original = read_file(reference / entry.path);
        std::string fresh;
        try {
            fresh = read_file(regenerated / entry.path);
        } catch (const IoError&) {
            mismatches.push_back(entry.path + " (missing)");
            continue;
        }
        if (original != fresh) mismatches.push_back(entry.path);
    }
    return mismatches;
}

} // namespace fnet
