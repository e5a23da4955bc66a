/*
 * Copyright 2026 The TIN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tin/error.hpp"

namespace tin {

// SHA-1 of "blob <size>\0<content>", i.e. what `git hash-object` prints.
inline std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("sha1: cannot allocate context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha1: digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string git_file_hash(const std::string& path) { return git_blob_hash(read_file(path)); }

// Provenance record written next to every CLI output.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;   // file -> blob hash
  std::map<std::string, std::string> outputs;  // file -> blob hash

  // Adds a file, or every regular file directly inside a directory except
  // the manifest itself, keyed by file name.
  static void hash_into(std::map<std::string, std::string>& dst, const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file() && e.path().filename() != "manifest") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) dst[f.filename().string()] = git_file_hash(f.string());
    } else {
      dst[path] = git_file_hash(path);
    }
  }

  void add_input(const std::string& path) { hash_into(inputs, path); }
  void add_output(const std::string& path) { hash_into(outputs, path); }

  std::string str() const {
    std::ostringstream os;
    os << "subcommand = " << subcommand << '\n';
    for (const auto& [k, v] : config) os << "config." << k << " = " << v << '\n';
    for (const auto& [k, v] : inputs) os << "input." << k << " = " << v << '\n';
    for (const auto& [k, v] : outputs) os << "output." << k << " = " << v << '\n';
    return os.str();
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write manifest " + path);
    out << str();
  }
};

}  // namespace tin
