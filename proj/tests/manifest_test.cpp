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

#include "tin/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

namespace tin {
namespace {

namespace fs = std::filesystem;

// Reference digests from `git hash-object`.
TEST(Manifest, BlobHashMatchesGit) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Manifest, DirectoryHashedByFileNameSkippingManifest) {
  const fs::path dir = fs::temp_directory_path() / "tin_manifest_test";
  fs::remove_all(dir);
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "b.txt") << "hello\n";
  std::ofstream(dir / "a.txt");
  std::ofstream(dir / "manifest") << "old";
  std::ofstream(dir / "sub" / "c.txt") << "x";

  RunManifest m;
  m.subcommand = "test";
  m.config["k"] = "v";
  m.add_output(dir.string());
  ASSERT_EQ(m.outputs.size(), 2u);
  EXPECT_EQ(m.outputs.at("a.txt"), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(m.outputs.at("b.txt"), "ce013625030ba8dba906f756967f9e9ca394464a");

  m.add_input((dir / "b.txt").string());
  EXPECT_EQ(m.str(),
            "subcommand = test\nconfig.k = v\ninput." + (dir / "b.txt").string() +
                " = ce013625030ba8dba906f756967f9e9ca394464a\n"
                "output.a.txt = e69de29bb2d1d6434b8b29ae775ad8c2e48c5391\n"
                "output.b.txt = ce013625030ba8dba906f756967f9e9ca394464a\n");
  fs::remove_all(dir);
}

TEST(Manifest, MissingFileThrows) { EXPECT_THROW(git_file_hash("/nonexistent/x"), InputError); }

}  // namespace
}  // namespace tin
