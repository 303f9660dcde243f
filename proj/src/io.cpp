// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/io.hpp"

#include "promhr/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace promhr::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; big-endian hosts need byte swapping");

template <typename T>
void put(std::string &out, T v)
{
   char buf[sizeof(T)];
   std::memcpy(buf, &v, sizeof(T));
   out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t &pos)
{
   if (pos + sizeof(T) > bytes.size())
   {
      throw ArtifactError("matrix file truncated");
   }
   T v;
   std::memcpy(&v, bytes.data() + pos, sizeof(T));
   pos += sizeof(T);
   return v;
}

} // namespace

std::string encode_matrix(const Matrix &M)
{
   std::string out;
   const std::size_t n = static_cast<std::size_t>(M.size());
   out.reserve(24 + 8 * n);
   out.append(kMatrixMagic, 4);
   put<std::uint32_t>(out, kMatrixVersion);
   put<std::uint64_t>(out, static_cast<std::uint64_t>(M.rows()));
   put<std::uint64_t>(out, static_cast<std::uint64_t>(M.cols()));
   out.append(reinterpret_cast<const char *>(M.data()), n * sizeof(double));
   return out;
}

Matrix decode_matrix(std::string_view bytes)
{
   if (bytes.size() < 4 || std::memcmp(bytes.data(), kMatrixMagic, 4) != 0)
   {
      throw ArtifactError("not a PRMF matrix file (bad magic)");
   }
   std::size_t pos = 4;
   const auto version = get<std::uint32_t>(bytes, pos);
   if (version != kMatrixVersion)
   {
      throw ArtifactError("unsupported PRMF version " + std::to_string(version));
   }
   const auto rows = get<std::uint64_t>(bytes, pos);
   const auto cols = get<std::uint64_t>(bytes, pos);
   if (cols != 0 && rows > (bytes.size() - pos) / sizeof(double) / cols)
   {
      throw ArtifactError("matrix file truncated");
   }
   const std::size_t n = static_cast<std::size_t>(rows * cols);
   if (bytes.size() - pos != n * sizeof(double))
   {
      throw ArtifactError("matrix file size does not match its header");
   }
   Matrix M(static_cast<Index>(rows), static_cast<Index>(cols));
   std::memcpy(M.data(), bytes.data() + pos, n * sizeof(double));
   return M;
}

void write_matrix(const std::filesystem::path &path, const Matrix &M)
{
   write_file_atomic(path, encode_matrix(M));
}

Matrix read_matrix(const std::filesystem::path &path)
{
   try
   {
      return decode_matrix(read_file(path));
   }
   catch (const ArtifactError &e)
   {
      throw ArtifactError(path.string() + ": " + e.what());
   }
}

void write_file_atomic(const std::filesystem::path &path, std::string_view contents)
{
   if (path.has_parent_path())
   {
      std::filesystem::create_directories(path.parent_path());
   }
   std::filesystem::path tmp = path;
   tmp += ".tmp";
   {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os)
      {
         throw ArtifactError("cannot open " + tmp.string() + " for writing");
      }
      os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
      if (!os)
      {
         throw ArtifactError("write failed: " + tmp.string());
      }
   }
   std::error_code ec;
   std::filesystem::rename(tmp, path, ec);
   if (ec)
   {
      throw ArtifactError("cannot rename " + tmp.string() + ": " + ec.message());
   }
}

std::string read_file(const std::filesystem::path &path)
{
   std::ifstream is(path, std::ios::binary);
   if (!is)
   {
      throw ArtifactError("cannot open " + path.string());
   }
   std::ostringstream ss;
   ss << is.rdbuf();
   return ss.str();
}

std::string sha256_hex(std::string_view bytes)
{
   std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
   unsigned int len = 0;
   if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
   {
      throw Error("sha256 digest failed");
   }
   static constexpr char hex[] = "0123456789abcdef";
   std::string out;
   out.reserve(2 * len);
   for (unsigned int i = 0; i < len; ++i)
   {
      out.push_back(hex[md[i] >> 4]);
      out.push_back(hex[md[i] & 0xf]);
   }
   return out;
}

std::string sha256_file(const std::filesystem::path &path)
{
   return sha256_hex(read_file(path));
}

std::string format_double(double v)
{
   std::array<char, 32> buf{};
   auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
   if (ec != std::errc())
   {
      throw Error("format_double failed");
   }
   return std::string(buf.data(), ptr);
}

} // namespace promhr::io
