// SPDX-License-Identifier: Apache-2.0
//
// charm: radio-map-aided channel estimation for pilot-starved MIMO-OFDM
// Copyright (C) 2026 The charm authors
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

#include <stdexcept>
#include <string>

namespace charm
{

// Invalid configuration or argument values.
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// File system and parse failures.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Numerically undefined situations: zero-power references, singular systems, empty supports.
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace charm
