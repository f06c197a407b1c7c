#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hga/encoder.hpp"
#include "hga/gradcheck.hpp"
#include "hga/hga_head.hpp"
#include "hga/loss.hpp"

namespace hga {

struct PipelineCheckConfig {
  std::size_t length = 12;
  std::size_t types = 3;
  std::size_t hidden = 16;
  std::size_t head_hidden = 8;
  std::size_t layers = 2;
  std::size_t attn_heads = 2;
  std::size_t vocab_size = 20;
  std::size_t padding = 2;
  double balance_b = 0.3;
  double init_scale = 0.3;
  std::uint64_t seed = 1;
};

// A randomly initialised encoder + hga head + balanced loss over one random
// document, with every parameter perturbed away from its standard init so
// that no gradient is structurally zero.
struct PipelineFixture {
  EncoderConfig encoder;
  HeadConfig head;
  BalanceConfig balance;
  TokenSequence seq;
  std::vector<std::optional<Box>> boxes;
  EntitySet gold;
  HyperedgeLabels labels;
  ParamStore params;

  LossGraph graph() const;
};

PipelineFixture make_pipeline_fixture(const PipelineCheckConfig& cfg);

}  // namespace hga
