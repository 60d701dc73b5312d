#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qtc/qtensor.hpp"

namespace qtc {

/// Tensor container: "QTEN1", u64 k, k x u64 dims, then the W, X, Y, Z
/// volumes as f64 in storage order. Everything little-endian.
void write_qtensor(const std::filesystem::path& path, const QTensor& t);
QTensor read_qtensor(const std::filesystem::path& path);

/// Mask container: "QMSK1", u64 k, k x u64 dims, then one byte (0 or 1) per
/// entry in storage order.
void write_mask(const std::filesystem::path& path, const ObsMask& m);
ObsMask read_mask(const std::filesystem::path& path);

/// Every *.png in `dir`, in lexicographic file-name order, as a pure
/// rows x cols x frames tensor (R -> i, G -> j, B -> k, values 0..255).
/// Grey, palette and alpha images are converted to 8-bit RGB.
QTensor load_frames(const std::filesystem::path& dir);

/// Writes frame_0000.png, frame_0001.png, ... Channels are clamped to
/// [0, 255] and rounded half away from zero; the real part is ignored.
/// A 2-mode tensor is written as one frame. Creates `dir` if needed.
void save_frames(const QTensor& t, const std::filesystem::path& dir);

/// The value save_frames stores for a channel value.
unsigned char to_byte(double v);

/// Flat key = value configuration. Blank lines and lines starting with '#'
/// are skipped; keys and values are trimmed. Throws std::runtime_error with
/// the line number on a malformed line or a repeated key.
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);
std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path);

}  // namespace qtc
