#include "evodepth/keyframe.hpp"

namespace evd {

void KeyframeRuleConfig::validate() const {
  if (speed_threshold_mps <= 0 || distance_threshold_m <= 0) {
    throw ConfigError("keyframe rule thresholds must be positive");
  }
}

KeyframeLabel label_keyframe(const SceneState& prev, const SceneState& now,
                             const KeyframeRuleConfig& rules) {
  rules.validate();
  KeyframeLabel label;
  label.t = now.t;

  if (now.ego_speed > rules.speed_threshold_mps) {
    label.rules |= unsigned(KeyframeRule::Speed);
  }
  for (const PrimitiveState& p : now.primitives) {
    if (p.visible && p.distance_m < rules.distance_threshold_m) {
      label.rules |= unsigned(KeyframeRule::Proximity);
      break;
    }
  }
  if (rules.new_object_rule &&
      now.primitives.size() == prev.primitives.size()) {
    for (std::size_t i = 0; i < now.primitives.size(); ++i) {
      if (now.primitives[i].visible && !prev.primitives[i].visible) {
        label.rules |= unsigned(KeyframeRule::NewObject);
        break;
      }
    }
  }
  label.keyframe = label.rules != 0;
  return label;
}

}  // namespace evd
