#include "earshot/model/config.hpp"

namespace earshot::model {

Profile profile_from_string(const std::string& s) {
  if (s == "paper") return Profile::Paper;
  if (s == "tiny") return Profile::Tiny;
  throw ConfigError("unknown model profile: " + s);
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::VisualOnly, Variant::VisualOnlyTf, Variant::AudioOnly,
                    Variant::AudioOnlyTf, Variant::Audiovisual, Variant::AudiovisualTf,
                    Variant::AudiovisualTfNonaligned}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown model variant: " + s);
}

}  // namespace earshot::model
