#include "llata/text_context.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "llata/error.hpp"
#include "llata/kernels.hpp"

namespace llata {

namespace {

constexpr const char* kRelatedSeparator =
    "The abstract of other papers related to its content:";

std::string truncated(const std::string& text, std::size_t cap) {
  if (cap == 0 || text.size() <= cap) return text;
  return text.substr(0, cap);
}

void replace_all(std::string& hay, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = hay.find(key, pos)) != std::string::npos) {
    hay.replace(pos, key.size(), value);
    pos += value.size();
  }
}

}  // namespace

std::vector<ClassInfo> load_class_info(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (!j.is_array()) throw InputError(path + ": expected a JSON array");
  std::vector<ClassInfo> classes;
  for (const auto& item : j) {
    if (!item.contains("name") || !item["name"].is_string()) {
      throw InputError(path + ": class record without \"name\"");
    }
    classes.push_back({item["name"].get<std::string>(),
                       item.value("description", std::string{})});
  }
  return classes;
}

std::vector<std::pair<NodeId, double>> similarity_weights(const Graph& g,
                                                          const NodeSet& community,
                                                          NodeId alpha) {
  if (!community.contains(alpha)) {
    throw std::domain_error("similarity weights: target not in community");
  }
  std::vector<std::pair<NodeId, double>> out;
  if (community.size() < 2) return out;

  out.reserve(community.size() - 1);
  const bool with_features = g.has_features();
  std::span<const float> xa;
  if (with_features) xa = g.features.row(alpha);
  for (NodeId beta : community) {
    if (beta == alpha) continue;
    const double sim = with_features ? kernels::cosine(xa, g.features.row(beta)) : 0.0;
    out.emplace_back(beta, sim);
  }

  // softmax over the similarities (self term excluded from the denominator)
  double mx = out[0].second;
  for (const auto& [b, s] : out) mx = std::max(mx, s);
  double total = 0.0;
  for (auto& [b, s] : out) {
    s = std::exp(s - mx);
    total += s;
  }
  for (auto& [b, s] : out) s /= total;
  return out;
}

std::string AugmentedText::concatenated() const {
  if (appended.empty()) return base_text;
  std::string out = base_text;
  out += "\n";
  out += kRelatedSeparator;
  for (const auto& [src, text] : appended) {
    out += ' ';
    out += text;
  }
  return out;
}

AugmentedText augment_text(const Graph& g, const NodeSet& community, NodeId alpha,
                           double epsilon, std::size_t k_top) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::domain_error("epsilon must be in [0, 1]");

  AugmentedText out;
  out.node = alpha;
  out.base_text = alpha < g.texts.size() ? g.texts[alpha] : std::string{};

  auto weights = similarity_weights(g, community, alpha);
  // keep members that pass the threshold and have text to share
  std::erase_if(weights, [&](const auto& entry) {
    return entry.second < epsilon || entry.first >= g.texts.size() ||
           g.texts[entry.first].empty();
  });
  std::stable_sort(weights.begin(), weights.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  if (weights.size() > k_top) weights.resize(k_top);

  for (const auto& [beta, w] : weights) {
    out.appended.emplace_back(beta, g.texts[beta]);
  }
  return out;
}

std::string format_line(std::size_t class_count) {
  static constexpr int kDigits[6] = {8, 4, 1, 2, 5, 3};
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < class_count; ++i) {
    if (i) os << ", ";
    os << kDigits[i % 6];
  }
  os << ']';
  return os.str();
}

std::string build_prompt(const PromptBundle& bundle, const std::string& template_text,
                         std::size_t max_chars_per_text) {
  if (bundle.classes.size() < 2) throw std::domain_error("prompt needs at least two classes");

  const std::string& entity = bundle.entity;

  std::ostringstream classes_part;
  classes_part << "Here is a " << entity << " 1 which belongs to one of the following categories: {";
  for (std::size_t i = 0; i < bundle.classes.size(); ++i) {
    if (i) classes_part << ", ";
    classes_part << bundle.classes[i].name;
  }
  classes_part << "}.";
  for (const ClassInfo& cls : bundle.classes) {
    if (cls.description.empty()) continue;  // name-only fallback
    classes_part << "\n\nThe description of {" << cls.name << "}:\n"
                 << truncated(cls.description, max_chars_per_text);
  }

  std::string target_text = truncated(bundle.payload.base_text, max_chars_per_text);

  std::string related_text;
  for (const auto& [src, text] : bundle.payload.appended) {
    if (!related_text.empty()) related_text += ' ';
    related_text += truncated(text, max_chars_per_text);
  }

  const std::string fmt = format_line(bundle.classes.size());

  if (!template_text.empty()) {
    std::string out = template_text;
    replace_all(out, "{classes}", classes_part.str());
    replace_all(out, "{target_text}", target_text);
    replace_all(out, "{related_texts}", related_text);
    replace_all(out, "{format_line}", fmt);
    replace_all(out, "{topology}", bundle.topology_description);
    return out;
  }

  std::ostringstream prompt;
  prompt << classes_part.str();
  prompt << "\n\nThe abstract of " << entity << " 1: " << target_text;
  if (!related_text.empty()) {
    prompt << "\n\n" << kRelatedSeparator << ' ' << related_text;
  }
  if (!bundle.topology_description.empty()) {
    prompt << "\n\n" << bundle.topology_description;
  }
  if (!bundle.task_description.empty()) {
    prompt << "\n\n" << bundle.task_description;
  } else {
    prompt << "\n\nBased on the abstract of " << entity << " 1 and other " << entity
           << "s, please provide the probability that " << entity
           << " 1 belongs to each category.";
  }
  prompt << "\n\nFor the current " << entity
         << " 1, please focus on the topic, methodology, keywords, and conclusions.";
  prompt << "\n\nFor the related " << entity << "s, please focus on parts similar to those on "
         << entity << " 1.";
  prompt << "\n\nUse integers from 0 to 9 to represent the probabilities. 0 means it is "
            "impossible to belong to that category, and 9 means it definitely belongs to "
            "that category.\nThe example format is:\n"
         << fmt << '.';
  return prompt.str();
}

}  // namespace llata
