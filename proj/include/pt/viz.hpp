#pragma once

#include <span>
#include <string>

#include "pt/envs.hpp"
#include "pt/model.hpp"
#include "pt/pipeline.hpp"

namespace pt {

// Maze walls, the executed path as hue-graded segments (red at the start to
// violet at the end), a goal star, and one polyline per replan running from
// its anchor (red dot) through the n plan key-points. Plans must carry the
// (x, y) state columns, i.e. plan_state_indices {0, 1}.
std::string render_plan_overlay(const RolloutRecord& record, const MazeLayout& layout);

// One cell per (query, key) pair. Layers 1-3 drive the red, green and blue
// channels with heads averaged; channel value = round(255 * weight). Layers
// past the third are drawn as extra grayscale panels. Key columns carry the
// modality tag of their token. Throws ContractViolation on an empty capture.
std::string render_attention(const AttentionCapture& capture, std::span<const Modality> layout,
                             std::size_t batch_index = 0);

// Head-averaged weights and the RGB triple of every cell:
//   {"layers","length","layout":[...],"weights":[layer][q][k],"rgb":[q][k][3]}
std::string attention_json(const AttentionCapture& capture, std::span<const Modality> layout,
                           std::size_t batch_index = 0);

}  // namespace pt
