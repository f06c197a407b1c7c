#include "hga/funsd.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hga/error.hpp"

namespace hga {
namespace {

using nlohmann::json;

std::optional<Box> read_box(const json& j, const std::string& where) {
  if (!j.contains("box") || j["box"].is_null()) return std::nullopt;
  const json& b = j["box"];
  if (!b.is_array() || b.size() != 4) throw SchemaError(where + ": \"box\" must be 4 integers");
  Box box{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
  if (box.x0 > box.x1 || box.y0 > box.y1) throw SchemaError(where + ": inverted box");
  return box;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

json box_json(const std::optional<Box>& box) {
  if (!box) return nullptr;
  return json::array({box->x0, box->y0, box->x1, box->y1});
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Document parse_funsd(const std::string& json_text, const std::string& doc_id, const LabelSet& labels,
                     const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": malformed JSON at byte offset " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!root.is_object() || !root.contains("form") || !root["form"].is_array()) {
    throw SchemaError(source + ": top-level object must contain a \"form\" array");
  }
  Document doc;
  doc.id = doc_id;
  if (root.contains("page_size") && root["page_size"].is_array() && root["page_size"].size() == 2) {
    doc.page_size = std::make_pair(root["page_size"][0].get<int>(), root["page_size"][1].get<int>());
  }
  try {
    const json& form = root["form"];
    for (std::size_t k = 0; k < form.size(); ++k) {
      const json& item = form[k];
      const std::string where =
          source + ": form[" + std::to_string(k) + "]" +
          (item.is_object() && item.contains("id") ? " (id " + item["id"].dump() + ")" : std::string());
      if (!item.is_object()) throw SchemaError(where + ": node must be an object");
      if (!item.contains("text") || !item["text"].is_string()) throw SchemaError(where + ": missing \"text\" field");
      TextNode node;
      node.text = item["text"].get<std::string>();
      if (split_words(node.text).empty()) continue;
      node.id = static_cast<int>(doc.nodes.size());
      node.box = read_box(item, where);
      const std::string label =
          item.contains("label") && item["label"].is_string() ? lowercase(item["label"].get<std::string>()) : kOtherLabel;
      node.label = labels.contains(label) ? label : kOtherLabel;
      if (item.contains("words") && item["words"].is_array()) {
        for (std::size_t w = 0; w < item["words"].size(); ++w) {
          const json& wj = item["words"][w];
          const std::string wwhere = where + ".words[" + std::to_string(w) + "]";
          if (!wj.is_object() || !wj.contains("text") || !wj["text"].is_string()) {
            throw SchemaError(wwhere + ": missing \"text\" field");
          }
          node.words.push_back(Word{wj["text"].get<std::string>(), read_box(wj, wwhere)});
        }
      }
      doc.nodes.push_back(std::move(node));
    }
  } catch (const json::exception& e) {
    throw SchemaError(source + ": " + e.what());
  }
  return doc;
}

std::vector<Document> load_funsd_json(const std::filesystem::path& path, const LabelSet& labels) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw Error("no such dataset file or directory: " + path.string());
  }
  std::vector<Document> docs;
  docs.reserve(files.size());
  for (const auto& f : files) docs.push_back(parse_funsd(read_file(f), f.stem().string(), labels, f.string()));
  return docs;
}

std::string to_funsd_json(const Document& doc) {
  json form = json::array();
  for (const TextNode& n : doc.nodes) {
    json words = json::array();
    for (const Word& w : n.words) words.push_back({{"text", w.text}, {"box", box_json(w.box)}});
    form.push_back({{"id", n.id},
                    {"text", n.text},
                    {"label", n.label},
                    {"box", box_json(n.box)},
                    {"words", std::move(words)},
                    {"linking", json::array()}});
  }
  json root;
  root["form"] = std::move(form);
  if (doc.page_size) root["page_size"] = {doc.page_size->first, doc.page_size->second};
  return root.dump(1) + "\n";
}

void save_funsd_json(const std::filesystem::path& path, const Document& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_funsd_json(doc);
}

}  // namespace hga
