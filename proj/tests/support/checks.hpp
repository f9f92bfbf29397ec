#pragma once

#include <doctest.h>

#include "pla/errors.hpp"

// assert that the expression throws pla::Error with the given code
#define CHECK_ERRC(expr, errc)                                                                     \
    do {                                                                                           \
        bool thrown_ = false;                                                                      \
        try {                                                                                      \
            (void)(expr);                                                                          \
        } catch (const pla::Error& e_) {                                                           \
            thrown_ = true;                                                                        \
            CHECK(e_.code == (errc));                                                              \
        }                                                                                          \
        CHECK(thrown_);                                                                            \
    } while (0)
