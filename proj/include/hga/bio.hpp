#pragma once

#include <span>
#include <string>
#include <vector>

#include "hga/document.hpp"

namespace hga {

// Integer tag coding shared with the token-classification heads:
// 0 = O, 1 + 2t = B-<t>, 2 + 2t = I-<t>.
inline int begin_tag(int type) { return 1 + 2 * type; }
inline int inside_tag(int type) { return 2 + 2 * type; }
inline std::size_t tag_count(std::size_t num_types) { return 2 * num_types + 1; }

std::vector<int> entities_to_tag_ids(const EntitySet& entities, std::size_t length, std::size_t num_types);
// Maximal typed spans; an I- tag that does not continue a span of the same
// type opens a new one (conll/seqeval repair).
EntitySet tag_ids_to_entities(std::span<const int> tags, std::size_t num_types);

std::string tag_name(int tag, const LabelSet& labels);
int parse_tag(const std::string& tag, const LabelSet& labels);

// Throws InvalidArgument on overlapping or out-of-range entities.
std::vector<std::string> entities_to_bio(const EntitySet& entities, std::size_t length, const LabelSet& labels);
// Throws ParseError on a malformed tag, InvalidArgument on an unknown type.
EntitySet bio_to_entities(std::span<const std::string> tags, const LabelSet& labels);

}  // namespace hga
