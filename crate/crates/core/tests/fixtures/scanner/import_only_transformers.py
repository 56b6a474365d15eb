# expect: none
import transformers
from transformers import AutoModel

print(transformers.__version__, AutoModel)
