from transformers import AutoModelForCausalLM

lm = AutoModelForCausalLM.from_pretrained("meta-llama/Llama-3.1-8B-Instruct")
old = AutoModelForCausalLM.from_pretrained("my-org/deleted-model")
