from collections import Counter

words = ["a", "b", "a"]
print(Counter(words))
