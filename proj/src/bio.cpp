#include "hga/bio.hpp"

#include "hga/error.hpp"

namespace hga {

std::vector<int> entities_to_tag_ids(const EntitySet& entities, std::size_t length, std::size_t num_types) {
  std::vector<int> tags(length, 0);
  for (const Entity& e : entities) {
    if (e.type < 0 || static_cast<std::size_t>(e.type) >= num_types) {
      throw InvalidArgument("entity type " + std::to_string(e.type) + " out of range");
    }
    if (e.start < 0 || e.start > e.end || static_cast<std::size_t>(e.end) >= length) {
      throw InvalidArgument("entity span [" + std::to_string(e.start) + "," + std::to_string(e.end) +
                            "] invalid for length " + std::to_string(length));
    }
    for (int i = e.start; i <= e.end; ++i) {
      if (tags[static_cast<std::size_t>(i)] != 0) {
        throw InvalidArgument("overlapping entities at token " + std::to_string(i));
      }
      tags[static_cast<std::size_t>(i)] = i == e.start ? begin_tag(e.type) : inside_tag(e.type);
    }
  }
  return tags;
}

EntitySet tag_ids_to_entities(std::span<const int> tags, std::size_t num_types) {
  EntitySet out;
  int open_type = -1;
  int open_start = 0;
  auto close = [&](int end) {
    if (open_type >= 0) out.push_back(Entity{open_type, open_start, end});
    open_type = -1;
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const int tag = tags[i];
    if (tag < 0 || static_cast<std::size_t>(tag) >= tag_count(num_types)) {
      throw InvalidArgument("tag id " + std::to_string(tag) + " out of range");
    }
    const int pos = static_cast<int>(i);
    if (tag == 0) {
      close(pos - 1);
      continue;
    }
    const int type = (tag - 1) / 2;
    const bool begin = (tag - 1) % 2 == 0;
    if (begin || type != open_type) {
      close(pos - 1);
      open_type = type;
      open_start = pos;
    }
  }
  close(static_cast<int>(tags.size()) - 1);
  return out;
}

std::string tag_name(int tag, const LabelSet& labels) {
  if (tag == 0) return "O";
  const auto type = static_cast<std::size_t>((tag - 1) / 2);
  return ((tag - 1) % 2 == 0 ? "B-" : "I-") + labels.name(type);
}

int parse_tag(const std::string& tag, const LabelSet& labels) {
  if (tag == "O") return 0;
  if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
    throw ParseError("malformed BIO tag: '" + tag + "'");
  }
  const auto type = labels.index_of(tag.substr(2));
  if (!type) throw InvalidArgument("unknown entity type in BIO tag: '" + tag + "'");
  return tag[0] == 'B' ? begin_tag(*type) : inside_tag(*type);
}

std::vector<std::string> entities_to_bio(const EntitySet& entities, std::size_t length, const LabelSet& labels) {
  std::vector<std::string> out;
  out.reserve(length);
  for (int t : entities_to_tag_ids(entities, length, labels.size())) out.push_back(tag_name(t, labels));
  return out;
}

EntitySet bio_to_entities(std::span<const std::string> tags, const LabelSet& labels) {
  std::vector<int> ids;
  ids.reserve(tags.size());
  for (const auto& t : tags) ids.push_back(parse_tag(t, labels));
  return tag_ids_to_entities(ids, labels.size());
}

}  // namespace hga
