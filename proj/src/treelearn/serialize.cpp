#include "mdlab/treelearn/serialize.hpp"

#include "mdlab/common/errors.hpp"

namespace mdlab::treelearn {

namespace {

std::string task_name(Task t) { return t == Task::Regression ? "regression" : "classification"; }

Task parse_task(const std::string& s) {
  if (s == "regression") return Task::Regression;
  if (s == "classification") return Task::Classification;
  throw ParseError("unknown tree task '" + s + "'");
}

}  // namespace

Json features_to_json(const std::vector<FeatureInfo>& features) {
  Json arr = Json::array();
  for (const auto& f : features) {
    Json j;
    j["name"] = f.name;
    j["kind"] = f.kind == FeatureKind::Nominal ? "nominal" : "ordered";
    if (f.kind == FeatureKind::Nominal) j["levels"] = f.num_levels;
    arr.push_back(j);
  }
  return arr;
}

std::vector<FeatureInfo> features_from_json(const Json& j) {
  std::vector<FeatureInfo> out;
  for (const auto& f : j) {
    FeatureInfo info;
    info.name = f.at("name").get<std::string>();
    std::string kind = f.at("kind").get<std::string>();
    if (kind == "nominal") {
      info.kind = FeatureKind::Nominal;
      info.num_levels = f.at("levels").get<int>();
    } else if (kind != "ordered") {
      throw ParseError("unknown feature kind '" + kind + "'");
    }
    out.push_back(info);
  }
  return out;
}

Json tree_to_json(const TreeModel& tree, bool include_members) {
  Json j;
  j["task"] = task_name(tree.task());
  j["num_classes"] = tree.num_classes();
  j["num_features"] = tree.num_features();
  Json nodes = Json::array();
  for (const auto& n : tree.nodes()) {
    if (n.feature < 0) {
      nodes.push_back({{"leaf", n.leaf}});
      continue;
    }
    Json nd;
    nd["feature"] = n.feature;
    if (n.nominal) {
      nd["left_levels"] = n.left_levels;
    } else {
      nd["threshold"] = n.threshold;
    }
    nd["default_left"] = n.default_left;
    nd["left"] = n.left;
    nd["right"] = n.right;
    nodes.push_back(nd);
  }
  j["nodes"] = nodes;
  Json leaves = Json::array();
  for (const auto& lf : tree.leaves()) {
    Json l;
    l["value"] = lf.value;
    l["size"] = lf.size;
    if (tree.task() == Task::Classification) {
      l["class_counts"] = lf.class_counts;
    } else {
      l["sd"] = lf.sd;
    }
    if (include_members) l["members"] = lf.members;
    leaves.push_back(l);
  }
  j["leaves"] = leaves;
  return j;
}

TreeModel tree_from_json(const Json& j) {
  try {
    Task task = parse_task(j.at("task").get<std::string>());
    std::vector<Node> nodes;
    for (const auto& nd : j.at("nodes")) {
      Node n;
      if (nd.contains("leaf")) {
        n.leaf = nd.at("leaf").get<int>();
      } else {
        n.feature = nd.at("feature").get<int>();
        if (nd.contains("left_levels")) {
          n.nominal = true;
          n.left_levels = nd.at("left_levels").get<std::uint64_t>();
        } else {
          n.threshold = nd.at("threshold").get<double>();
        }
        n.default_left = nd.value("default_left", true);
        n.left = nd.at("left").get<int>();
        n.right = nd.at("right").get<int>();
      }
      nodes.push_back(n);
    }
    std::vector<Leaf> leaves;
    for (const auto& l : j.at("leaves")) {
      Leaf lf;
      lf.value = l.at("value").get<double>();
      lf.size = l.value("size", 0u);
      if (l.contains("class_counts")) lf.class_counts = l.at("class_counts").get<std::vector<double>>();
      lf.sd = l.value("sd", 0.0);
      if (l.contains("members")) lf.members = l.at("members").get<std::vector<std::uint32_t>>();
      leaves.push_back(std::move(lf));
    }
    return TreeModel::assemble(task, j.at("num_classes").get<int>(), j.at("num_features").get<std::size_t>(),
                               std::move(nodes), std::move(leaves));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("tree model: ") + e.what());
  }
}

Json forest_to_json(const ForestModel& forest, bool include_members) {
  const auto& c = forest.config();
  Json j;
  j["task"] = task_name(c.task);
  j["num_classes"] = forest.num_classes();
  j["config"] = {{"num_trees", c.num_trees}, {"mtry", c.mtry},       {"sample_fraction", c.sample_fraction},
                 {"replace", c.replace},     {"min_leaf", c.min_leaf}, {"max_depth", c.max_depth}, {"max_bins", c.max_bins},
                 {"seed", c.seed}};
  Json trees = Json::array();
  for (const auto& t : forest.trees()) trees.push_back(tree_to_json(t, include_members));
  j["trees"] = trees;
  return j;
}

ForestModel forest_from_json(const Json& j) {
  try {
    ForestConfig c;
    c.task = parse_task(j.at("task").get<std::string>());
    const auto& cj = j.at("config");
    c.mtry = cj.value("mtry", 0);
    c.sample_fraction = cj.value("sample_fraction", 1.0);
    c.replace = cj.value("replace", true);
    c.min_leaf = cj.value("min_leaf", 0);
    c.max_depth = cj.value("max_depth", 0);
    c.max_bins = cj.value("max_bins", kDefaultMaxBins);
    c.seed = cj.value("seed", std::uint64_t{0});
    int K = j.at("num_classes").get<int>();
    c.num_classes = K;
    std::vector<TreeModel> trees;
    for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
    return ForestModel::assemble(c, K, std::move(trees));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("forest model: ") + e.what());
  }
}

}  // namespace mdlab::treelearn
