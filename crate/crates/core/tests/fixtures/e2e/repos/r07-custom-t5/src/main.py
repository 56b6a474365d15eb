from transformers import T5ForConditionalGeneration

CHECKPOINT = "t5-small"
model = T5ForConditionalGeneration.from_pretrained(CHECKPOINT)
