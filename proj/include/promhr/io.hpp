// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace promhr::io {

// Binary matrix file: "PRMF", u32 version, u64 rows, u64 cols (little-endian),
// then rows*cols binary64 values in column-major order.
inline constexpr char kMatrixMagic[4] = {'P', 'R', 'M', 'F'};
inline constexpr std::uint32_t kMatrixVersion = 1;

std::string encode_matrix(const Matrix &M);
Matrix decode_matrix(std::string_view bytes);

void write_matrix(const std::filesystem::path &path, const Matrix &M);
Matrix read_matrix(const std::filesystem::path &path);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path &path, std::string_view contents);
std::string read_file(const std::filesystem::path &path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path &path);

/// Shortest decimal string that round-trips to the same binary64 value.
std::string format_double(double v);

} // namespace promhr::io
