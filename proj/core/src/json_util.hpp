// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_SRC_JSON_UTIL_HPP_
#define INNET_SRC_JSON_UTIL_HPP_

#include <filesystem>
#include <string>

#include "json.hpp"

namespace innet::detail {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace innet::detail

#endif  // INNET_SRC_JSON_UTIL_HPP_
