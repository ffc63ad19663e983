"""Extract identity phrases from Twitter-style and Wikipedia-style bios."""

from personae.extraction import RawBio, extract_twitter, extract_wikipedia
from personae.errors import NoCopulaFound

twitter_bios = [
    "Progressive Christian, wife, I am a proud Canadian",
    "runner | coffee addict | she/her",
    "Dad of 3 • Buckeye fan • retired firefighter",
    "singer/songwriter; dreamer; #nashville",
    "I'm a storyteller.   Travel addict.   Occasional poet",
]

print("Twitter-style chunking + cleaning")
print("=" * 60)
for text in twitter_bios:
    bio = extract_twitter(RawBio("demo", "twitter", text))
    print(f"{text!r}")
    print(f"   -> {bio.identities}\n")

wikipedia_sentences = [
    "Stephen Davis is an American music journalist and historian.",
    "Ana Ruiz is a Spanish chess grandmaster, author, and television presenter.",
    "Maria Silva (born 1985) is a Brazilian footballer who plays as a striker.",
    "The bridge collapsed in 1994.",
]

print("Wikipedia-style copular grammar")
print("=" * 60)
for text in wikipedia_sentences:
    try:
        bio = extract_wikipedia(RawBio("demo", "wikipedia", text))
        print(f"{text!r}")
        print(f"   -> {bio.identities}\n")
    except NoCopulaFound:
        print(f"{text!r}")
        print("   -> skipped (no copular predicate)\n")
