# expect: L:roberta-base
from transformers import AutoModel


def load():
    return AutoModel.from_pretrained("roberta-base")


class Wrapper:
    def __init__(self):
        self.model = load()
