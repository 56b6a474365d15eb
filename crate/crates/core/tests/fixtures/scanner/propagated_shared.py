# expect: P:t5-small P:t5-small
from transformers import AutoTokenizer, T5ForConditionalGeneration

checkpoint = "t5-small"
tokenizer = AutoTokenizer.from_pretrained(checkpoint)
model = T5ForConditionalGeneration.from_pretrained(checkpoint)
