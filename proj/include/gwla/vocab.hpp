#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwla {

enum class WordClass { Shape, Colour, Pattern, Shade, Direction, Ambiguous };

inline const char* word_class_name(WordClass c) {
  switch (c) {
    case WordClass::Shape: return "shape";
    case WordClass::Colour: return "colour";
    case WordClass::Pattern: return "pattern";
    case WordClass::Shade: return "shade";
    case WordClass::Direction: return "direction";
    case WordClass::Ambiguous: return "ambiguous";
  }
  return "?";
}

inline constexpr int kNumShapes = 40;
inline constexpr int kNumColours = 10;

/// The 56-word instruction vocabulary: 40 shapes, 10 colours, 2 patterns,
/// 2 shades, 2 directions. Ids are dense in that order. Experiments may
/// append ambiguous nonce words (each tied to a reserved shape+colour
/// pairing) after the fixed block.
class Vocabulary {
 public:
  struct Entry {
    std::string word;
    WordClass cls;
    int attr;  // index within the class's attribute space
  };

  static const std::vector<std::string>& shape_words() {
    static const std::vector<std::string> v = {
        "chair",    "suitcase", "tv",          "ball",       "balloon", "cow",
        "zebra",    "cake",     "can",         "cassette",   "guitar",  "hair-brush",
        "hat",      "ice-lolly", "ladder",     "mug",        "pencil",  "toothbrush",
        "key",      "bottle",   "car",         "cherries",   "fork",    "fridge",
        "hammer",   "knife",    "spoon",       "apple",      "banana",  "flower",
        "jug",      "pig",      "pincer",      "plant",      "saxophone", "shoe",
        "tennis-racket", "tomato", "tree",     "wine-glass"};
    return v;
  }
  static const std::vector<std::string>& colour_words() {
    static const std::vector<std::string> v = {"blue", "brown",   "pink", "yellow", "red",
                                               "green", "cyan", "magenta", "grey", "purple"};
    return v;
  }

  Vocabulary() {
    for (int i = 0; i < kNumShapes; ++i) push(shape_words()[i], WordClass::Shape, i);
    for (int i = 0; i < kNumColours; ++i) push(colour_words()[i], WordClass::Colour, i);
    push("pinstriped", WordClass::Pattern, 0);
    push("dotted", WordClass::Pattern, 1);
    push("lighter", WordClass::Shade, 0);
    push("darker", WordClass::Shade, 1);
    push("left", WordClass::Direction, 0);
    push("right", WordClass::Direction, 1);
  }

  int size() const { return static_cast<int>(entries_.size()); }
  static constexpr int fixed_size() { return 56; }

  const std::string& word(int id) const { return at(id).word; }
  WordClass cls(int id) const { return at(id).cls; }
  /// Class-local attribute index (shape 0..39, colour 0..9, ...).
  int attr(int id) const { return at(id).attr; }

  int id(const std::string& word) const {
    auto it = by_word_.find(word);
    if (it == by_word_.end()) throw std::invalid_argument("unknown word: " + word);
    return it->second;
  }
  bool has(const std::string& word) const { return by_word_.count(word) != 0; }

  /// Appends a nonce word referring to the reserved (shape, colour) pairing.
  int add_ambiguous(const std::string& word, int shape_id, int colour_id) {
    int wid = push(word, WordClass::Ambiguous, shape_id);
    ambiguous_colour_[wid] = colour_id;
    return wid;
  }
  int ambiguous_shape(int id) const { return at(id).attr; }
  int ambiguous_colour(int id) const {
    auto it = ambiguous_colour_.find(id);
    if (it == ambiguous_colour_.end())
      throw std::invalid_argument("not an ambiguous word id: " + std::to_string(id));
    return it->second;
  }

  std::vector<int> ids_of_class(WordClass c) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (entries_[i].cls == c) out.push_back(i);
    return out;
  }

 private:
  const Entry& at(int id) const {
    if (id < 0 || id >= size())
      throw std::invalid_argument("word id out of range: " + std::to_string(id));
    return entries_[static_cast<size_t>(id)];
  }
  int push(const std::string& word, WordClass cls, int attr) {
    if (by_word_.count(word)) throw std::invalid_argument("duplicate word: " + word);
    int id = size();
    by_word_[word] = id;
    entries_.push_back({word, cls, attr});
    return id;
  }

  std::vector<Entry> entries_;
  std::map<std::string, int> by_word_;
  std::map<int, int> ambiguous_colour_;
};

}  // namespace gwla
