"""Constants shared by the compiled and pure-Python text kernels."""

# Sentence terminator characters. A run of these ends a sentence when
# followed by end-of-text, or by whitespace and then an uppercase letter.
TERMINATORS = ".!?"

# Lowercased trailing fragments that look like sentence ends but are not.
# Checked against the token ending at a candidate boundary, period included.
ABBREVIATIONS = frozenset(
    {
        "e.g.",
        "i.e.",
        "etc.",
        "cf.",
        "vs.",
        "mr.",
        "mrs.",
        "ms.",
        "dr.",
        "prof.",
        "jr.",
        "sr.",
        "st.",
        "u.s.",
        "u.k.",
        "u.n.",
        "a.m.",
        "p.m.",
    }
)

APOSTROPHE = "'"
