#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace taste {

/// Class order is fixed: index 0 negative, 1 neutral, 2 positive.
enum class Sentiment : std::uint8_t { Negative = 0, Neutral = 1, Positive = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Sentiment, kNumClasses> kAllSentiments = {
    Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive};

inline constexpr std::size_t index_of(Sentiment s) { return static_cast<std::size_t>(s); }

inline constexpr Sentiment sentiment_from_index(std::size_t i) {
  return static_cast<Sentiment>(i);
}

inline std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
    case Sentiment::Positive: return "positive";
  }
  return "neutral";
}

/// Accepts the long names and the POS/NEU/NEG tags of the public triplet data.
inline std::optional<Sentiment> parse_sentiment(std::string_view text) {
  std::string lower;
  lower.reserve(text.size());
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "negative" || lower == "neg") return Sentiment::Negative;
  if (lower == "neutral" || lower == "neu") return Sentiment::Neutral;
  if (lower == "positive" || lower == "pos") return Sentiment::Positive;
  return std::nullopt;
}

/// SST fine-grained label 0..4 to the three classes: {0,1} / {2} / {3,4}.
inline constexpr std::optional<Sentiment> collapse_sst_label(int label) {
  if (label < 0 || label > 4) return std::nullopt;
  if (label <= 1) return Sentiment::Negative;
  if (label == 2) return Sentiment::Neutral;
  return Sentiment::Positive;
}

}  // namespace taste
