#include "posestream/score_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace posestream {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void write_provenance(std::ostream& out, const std::optional<Provenance>& p) {
  if (p) out << "# config_hash=" << hex64(p->config_hash) << " seed=" << p->seed << "\n";
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

StreamScores read_scores(std::istream& in, StreamId id) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  ScoreVector::Kind kind = ScoreVector::Kind::probabilities;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.find("kind=logits") != std::string::npos) kind = ScoreVector::Kind::logits;
      continue;
    }
    header = split_csv(line);
    break;
  }
  if (header.empty() || header.front() != "video") throw std::invalid_argument("score file: missing 'video,...' header");
  const bool snippets = header.size() > 1 && header[1] == "snippet";
  const std::size_t first_class = snippets ? 2 : 1;
  if (header.size() <= first_class) throw std::invalid_argument("score file: header lists no classes");
  const auto classes = static_cast<Eigen::Index>(header.size() - first_class);

  StreamScores scores(id, classes);
  scores.set_kind(kind);
  std::vector<std::string> order;
  std::map<std::string, std::vector<Eigen::VectorXd>> grouped;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("score file line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    }
    Eigen::VectorXd row(classes);
    for (Eigen::Index k = 0; k < classes; ++k) row(k) = parse_double(cells[first_class + static_cast<std::size_t>(k)], line_no);
    if (snippets) {
      auto [it, inserted] = grouped.try_emplace(cells[0]);
      if (inserted) order.push_back(cells[0]);
      it->second.push_back(std::move(row));
    } else {
      scores.add(cells[0], std::move(row));
    }
  }
  if (snippets) {
    for (const auto& video : order) {
      const auto& rows = grouped[video];
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), classes);
      for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
      scores.add(video, consensus(m));
    }
  }
  return scores;
}

StreamScores read_scores(const std::filesystem::path& path, StreamId id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open score file " + path.string());
  try {
    return read_scores(in, id);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_scores(std::ostream& out, const StreamScores& scores, std::optional<Provenance> provenance) {
  write_provenance(out, provenance);
  out << "# kind=" << (scores.kind() == ScoreVector::Kind::logits ? "logits" : "probabilities") << "\n";
  out << "video";
  for (Eigen::Index k = 0; k < scores.classes(); ++k) out << ",class_" << k;
  out << "\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& video = scores.videos()[i];
    if (video.find(',') != std::string::npos) throw std::invalid_argument("video id contains a comma: " + video);
    out << video;
    const auto& row = scores.row(i);
    for (Eigen::Index k = 0; k < row.size(); ++k) out << ',' << format_double(row(k));
    out << "\n";
  }
}

void write_scores(const std::filesystem::path& path, const StreamScores& scores, std::optional<Provenance> provenance) {
  write_file_atomic(path, [&](std::ostream& out) { write_scores(out, scores, provenance); });
}

std::map<std::string, int> read_labels(std::istream& in) {
  std::map<std::string, int> labels;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (!header) {
      if (cells.size() != 2 || cells[0] != "video" || cells[1] != "label") {
        throw std::invalid_argument("labels file: expected header 'video,label'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 2) throw std::invalid_argument("labels file line " + std::to_string(line_no) + ": expected 2 fields");
    int label = 0;
    const auto [ptr, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
    if (ec != std::errc() || ptr != cells[1].data() + cells[1].size()) {
      throw std::invalid_argument("labels file line " + std::to_string(line_no) + ": bad label '" + cells[1] + "'");
    }
    if (!labels.emplace(cells[0], label).second) {
      throw std::invalid_argument("labels file line " + std::to_string(line_no) + ": duplicate video " + cells[0]);
    }
  }
  return labels;
}

std::map<std::string, int> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels file " + path.string());
  return read_labels(in);
}

void write_labels(std::ostream& out, const std::vector<std::pair<std::string, int>>& labels,
                  std::optional<Provenance> provenance) {
  write_provenance(out, provenance);
  out << "video,label\n";
  for (const auto& [video, label] : labels) out << video << ',' << label << "\n";
}

}  // namespace posestream
