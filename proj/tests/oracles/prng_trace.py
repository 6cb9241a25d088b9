"""Independent re-implementation of the trial PRNG, used to freeze expected
values in the C++ unit tests. Run: python3 tests/oracles/prng_trace.py"""

M = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(x):
    z = (x + GOLDEN) & M
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return z ^ (z >> 31)


def derive(base, key):
    return mix64(base ^ mix64(key))


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M


class Xoshiro:
    def __init__(self, seed):
        self.s = []
        sm = seed
        for _ in range(4):
            self.s.append(mix64(sm))
            sm = (sm + GOLDEN) & M

    def next(self):
        s = self.s
        result = (rotl((s[1] * 5) & M, 7) * 9) & M
        t = (s[1] << 17) & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result

    def below(self, n):
        threshold = ((1 << 64) - n) % n
        while True:
            r = self.next()
            if r >= threshold:
                return r % n

    def coin(self):
        return (self.next() >> 63) != 0


if __name__ == "__main__":
    for seed in (0, 42):
        g = Xoshiro(seed)
        print(f"Rng({seed}) first outputs:", [hex(g.next()) for _ in range(3)])
    print("derive(42, 7) =", hex(derive(42, 7)))

    # make_trial type 3, pool {"ветер"}: decoy index (below(1)) then coin.
    for seed in (42, 7):
        g = Xoshiro(seed)
        idx = g.below(1)
        print(f"type3 seed={seed}: decoy index {idx}, original_first={g.coin()}")

    # make_trial type 2 with a two-word pool: coin, then decoy index if replaced.
    for seed in (1, 2, 3, 4):
        g = Xoshiro(seed)
        shows_original = g.coin()
        idx = None if shows_original else g.below(2)
        print(f"type2 seed={seed}: shows_original={shows_original} decoy_index={idx}")

    # select_target over 10 words.
    print("select_target seed=5 over 10:", Xoshiro(5).below(10))
