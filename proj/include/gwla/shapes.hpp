#pragma once

#include <array>
#include <vector>

namespace gwla {

/// Hand-designed 2D silhouette, unit scale: u in [-0.5,0.5] (horizontal),
/// v in [0,1] (up from the floor). Extruded to a prism of the given depth
/// (also unit scale) to form the 3D object.
struct ShapePrototype {
  std::vector<std::array<float, 2>> silhouette;  // simple polygon, 8..24 vertices
  float depth;
};

/// Prototypes indexed like Vocabulary::shape_words(); 40 entries.
const ShapePrototype& shape_prototype(int shape_id);

/// Horizontal extent (max u - min u) of the silhouette, unit scale.
float silhouette_width(int shape_id);

}  // namespace gwla
