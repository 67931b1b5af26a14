#pragma once

#include "mdlab/common/json_util.hpp"
#include "mdlab/treelearn/forest.hpp"
#include "mdlab/treelearn/gbm.hpp"
#include "mdlab/treelearn/tree.hpp"

namespace mdlab::treelearn {

Json features_to_json(const std::vector<FeatureInfo>& features);
std::vector<FeatureInfo> features_from_json(const Json& j);

// Member row lists are large and only meaningful next to the training
// data, so they are left out unless asked for.
Json tree_to_json(const TreeModel& tree, bool include_members = false);
TreeModel tree_from_json(const Json& j);

Json forest_to_json(const ForestModel& forest, bool include_members = false);
ForestModel forest_from_json(const Json& j);

}  // namespace mdlab::treelearn
