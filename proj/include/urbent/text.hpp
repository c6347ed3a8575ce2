#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <unicode/errorcode.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

namespace urbent {

/// Longest tag, in code points, that survives normalization.
inline constexpr int kMaxTagLength = 128;

/// NFC-normalize, lowercase and trim a raw tag. Returns nullopt for tags that
/// end up empty or longer than kMaxTagLength code points. Invalid UTF-8 bytes
/// become U+FFFD.
inline std::optional<std::string> normalize_tag(std::string_view raw) {
  icu::ErrorCode status;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (status.isFailure()) return std::nullopt;

  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  s = nfc->normalize(s, status);
  s.toLower(icu::Locale::getRoot());
  s.trim();
  // Full case mapping can yield decomposed sequences (e.g. U+0130).
  s = nfc->normalize(s, status);
  if (status.isFailure()) return std::nullopt;

  const int32_t length = s.countChar32();
  if (length == 0 || length > kMaxTagLength) return std::nullopt;

  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace urbent
