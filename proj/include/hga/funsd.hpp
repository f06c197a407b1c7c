#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hga/document.hpp"

namespace hga {

// Parses one FUNSD-style form:
//   {"form": [{"id", "text", "label", "box", "words": [{"text", "box"}], "linking"}]}
// Labels are lowercased; labels outside `labels` become "other". Nodes whose
// text is empty or whitespace-only are dropped and ids renumbered in array
// order. "linking" is ignored. `source` names the input in error messages.
Document parse_funsd(const std::string& json_text, const std::string& doc_id, const LabelSet& labels,
                     const std::string& source = "<memory>");

// Loads a single .json file, or every .json file of a directory in
// lexicographic filename order. Document ids are the file stems.
std::vector<Document> load_funsd_json(const std::filesystem::path& path, const LabelSet& labels);

std::string to_funsd_json(const Document& doc);
void save_funsd_json(const std::filesystem::path& path, const Document& doc);

}  // namespace hga
