// Copyright 2026 The bspower Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bspower
{

/// Shortest round-trip decimal representation, locale independent.
inline std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{})
        throw std::runtime_error("format_double: conversion failed");
    return {buf, end};
}

inline std::string format_optional(const std::optional<double> &v)
{
    return v ? format_double(*v) : std::string{};
}

inline double parse_double(std::string_view s)
{
    double v = 0.0;
    const char *first = s.data();
    const char *last = s.data() + s.size();
    if (!s.empty() && *first == '+')
        ++first;
    auto [end, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || end != last)
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

template <typename Int>
Int parse_integer(std::string_view s)
{
    Int v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

} // namespace bspower
