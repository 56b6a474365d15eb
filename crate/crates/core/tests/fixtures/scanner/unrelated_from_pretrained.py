# expect: nomatch
from mylib import Loader

Loader.from_pretrained("not-a-hub-model")
