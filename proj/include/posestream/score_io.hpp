#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "posestream/fusion.hpp"
#include "posestream/io_util.hpp"

namespace posestream {

/// Score CSV:
///
///   # config_hash=<hex> seed=<int>            (optional comment lines)
///   # kind=probabilities|logits
///   video,class_0,...,class_{C-1}
///   <id>,<score>,...
///
/// The snippet-level variant has header `video,snippet,class_0,...`; its rows
/// are grouped per video and reduced with `consensus`.
StreamScores read_scores(std::istream& in, StreamId id = StreamId::other);
StreamScores read_scores(const std::filesystem::path& path, StreamId id = StreamId::other);

/// Values are printed with 17 significant digits so they round-trip exactly.
void write_scores(std::ostream& out, const StreamScores& scores, std::optional<Provenance> provenance = {});
void write_scores(const std::filesystem::path& path, const StreamScores& scores,
                  std::optional<Provenance> provenance = {});

/// Labels CSV: header `video,label`, one row per video.
std::map<std::string, int> read_labels(std::istream& in);
std::map<std::string, int> read_labels(const std::filesystem::path& path);
void write_labels(std::ostream& out, const std::vector<std::pair<std::string, int>>& labels,
                  std::optional<Provenance> provenance = {});

std::string format_double(double v);

}  // namespace posestream
